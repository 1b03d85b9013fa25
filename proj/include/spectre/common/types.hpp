#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spectre {

// Rows are samples, columns are features.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using IndexList = std::vector<std::size_t>;
using LabelList = std::vector<int>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when inputs violate an operation's preconditions.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Raised when training diverges (non-finite loss).
class TrainingFailure : public Error {
 public:
  using Error::Error;
};

/// Gathers the given rows of `m` into a new matrix.
Matrix select_rows(const Matrix& m, const IndexList& rows);

}  // namespace spectre
