#pragma once

#include "spectre/common/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>

namespace spectre::testing {

/// Largest relative error between `analytic` and central differences of `f`
/// over every coordinate of `params`. Denominator floored at 1e-6 so that
/// near-zero gradients are compared absolutely.
inline double max_fd_error(std::span<double> params, const Vector& analytic, const std::function<double()>& f,
                           double h = 1e-5) {
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = f();
    params[i] = saved - h;
    const double down = f();
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic(static_cast<Eigen::Index>(i));
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

}  // namespace spectre::testing
