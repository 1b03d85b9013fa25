#include "spectre/data/adult.hpp"

#include "spectre/common/rng.hpp"
#include "spectre/data/generators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace spectre::data {

const std::vector<std::string>& adult_continuous_columns() {
  static const std::vector<std::string> cols{"age", "education-num", "hours-per-week", "capital-gain", "capital-loss"};
  return cols;
}

const std::vector<std::string>& adult_occupations() {
  static const std::vector<std::string> values{
      "Tech-support",    "Craft-repair",     "Other-service",   "Sales",           "Exec-managerial",
      "Prof-specialty",  "Handlers-cleaners", "Machine-op-inspct", "Adm-clerical", "Farming-fishing",
      "Transport-moving", "Priv-house-serv", "Protective-serv", "Armed-Forces"};
  return values;
}

const std::vector<std::string>& adult_marital_statuses() {
  static const std::vector<std::string> values{"Married-civ-spouse", "Divorced",          "Never-married",
                                               "Separated",          "Widowed",           "Married-spouse-absent",
                                               "Married-AF-spouse"};
  return values;
}

namespace {

// Field positions in the census file.
constexpr std::size_t kAge = 0;
constexpr std::size_t kEducationNum = 4;
constexpr std::size_t kMarital = 5;
constexpr std::size_t kOccupation = 6;
constexpr std::size_t kCapitalGain = 10;
constexpr std::size_t kCapitalLoss = 11;
constexpr std::size_t kHours = 12;
constexpr std::size_t kIncome = 14;
constexpr std::size_t kFieldCount = 15;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> columns() {
  std::vector<std::string> out = adult_continuous_columns();
  for (const auto& o : adult_occupations()) out.push_back("occupation=" + o);
  for (const auto& m : adult_marital_statuses()) out.push_back("marital-status=" + m);
  return out;
}

double to_number(const std::string& text, std::size_t line, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("adult: line " + std::to_string(line) + ", field " + what + ": non-numeric value '" + text + "'");
  }
}

// Lower/upper quartiles by nearest rank.
std::pair<double, double> quartiles(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const auto at = [&](double q) {
    const auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    return values[std::max<std::size_t>(rank, 1) - 1];
  };
  return {at(0.25), at(0.75)};
}

}  // namespace

LabeledDataset load_adult_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  const auto& occupations = adult_occupations();
  const auto& marital = adult_marital_statuses();
  const std::size_t width = 5 + occupations.size() + marital.size();

  std::vector<double> values;
  LabeledDataset out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || line.front() == '|') continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream row(line);
    while (std::getline(row, field, ',')) fields.push_back(trim(field));
    if (line_no == 1 && !fields.empty() && fields[0] == "age") continue;
    if (fields.size() != kFieldCount) {
      throw InvalidInput("adult: line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                         " fields, expected 15");
    }
    if (std::any_of(fields.begin(), fields.end(), [](const std::string& f) { return f == "?"; })) continue;

    std::vector<double> row_values(width, 0.0);
    row_values[0] = to_number(fields[kAge], line_no, "age");
    row_values[1] = to_number(fields[kEducationNum], line_no, "education-num");
    row_values[2] = to_number(fields[kHours], line_no, "hours-per-week");
    row_values[3] = to_number(fields[kCapitalGain], line_no, "capital-gain");
    row_values[4] = to_number(fields[kCapitalLoss], line_no, "capital-loss");
    const auto occ = std::find(occupations.begin(), occupations.end(), fields[kOccupation]);
    if (occ == occupations.end()) {
      throw InvalidInput("adult: line " + std::to_string(line_no) + ": unknown occupation '" + fields[kOccupation] + "'");
    }
    row_values[5 + static_cast<std::size_t>(occ - occupations.begin())] = 1.0;
    const auto mar = std::find(marital.begin(), marital.end(), fields[kMarital]);
    if (mar == marital.end()) {
      throw InvalidInput("adult: line " + std::to_string(line_no) + ": unknown marital-status '" + fields[kMarital] +
                         "'");
    }
    row_values[5 + occupations.size() + static_cast<std::size_t>(mar - marital.begin())] = 1.0;
    values.insert(values.end(), row_values.begin(), row_values.end());
    out.labels.push_back(fields[kIncome].rfind(">50K", 0) == 0 ? 1 : 0);
  }
  const auto n = static_cast<Eigen::Index>(out.labels.size());
  if (n == 0) throw InvalidInput("adult: no complete rows in " + path.string());
  out.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, static_cast<Eigen::Index>(width));
  out.split.assign(out.labels.size(), Split::kTest);
  out.meta = DatasetMeta{"adult", "regular", 0, columns()};
  return out;
}

LabeledDataset inject_adult_anomaly(const LabeledDataset& base, const std::string& variant, std::uint64_t seed) {
  validate_variant(Family::kAdult, variant);
  std::vector<std::string> missing;
  for (const auto& name : adult_continuous_columns()) {
    if (!base.column_index(name)) missing.push_back(name);
  }
  const auto has_prefix = [&](const std::string& prefix) {
    return std::any_of(base.meta.columns.begin(), base.meta.columns.end(),
                       [&](const std::string& c) { return c.rfind(prefix, 0) == 0; });
  };
  if (!has_prefix("occupation=")) missing.push_back("occupation=*");
  if (!has_prefix("marital-status=")) missing.push_back("marital-status=*");
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw InvalidInput("inject_adult_anomaly: missing required columns: " + names);
  }

  LabeledDataset out = base;
  out.meta.variant = variant;
  out.meta.seed = seed;
  if (variant == "regular") return out;

  Rng rng(derive_seed(seed, "adult", variant));
  const auto age = static_cast<Eigen::Index>(*base.column_index("age"));
  const auto edu = static_cast<Eigen::Index>(*base.column_index("education-num"));
  const Eigen::Index n = base.features.rows();
  const auto flip = [&](Eigen::Index r) { out.labels[static_cast<std::size_t>(r)] ^= 1; };

  if (variant == "newvar") {
    const auto z = [&](Eigen::Index col) {
      const Vector c = base.features.col(col);
      const double mean = c.mean();
      const double sd = std::max(std::sqrt((c.array() - mean).square().mean()), 1e-8);
      return Vector((c.array() - mean) / sd);
    };
    const Vector score = z(age) + z(edu);
    for (Eigen::Index r = 0; r < n; ++r) {
      const bool eligible = score(r) > 0.0;
      const bool inherits = rng.bernoulli(0.3);
      const bool flips = rng.bernoulli(0.2);
      if (eligible && inherits && flips) flip(r);
    }
  } else if (variant == "mechanism") {
    const Vector c = base.features.col(edu);
    const auto [q1, q3] = quartiles(std::vector<double>(c.data(), c.data() + c.size()));
    for (Eigen::Index r = 0; r < n; ++r) {
      const bool flips = rng.bernoulli(0.5);
      if (c(r) > q1 && c(r) <= q3 && flips) flip(r);
    }
  } else if (variant == "confounder") {
    for (Eigen::Index r = 0; r < n; ++r) {
      const bool wealthy = rng.bernoulli(0.2);
      const bool flips = rng.bernoulli(0.35);
      if (!wealthy) continue;
      out.features(r, edu) += 1.0;
      if (flips) flip(r);
    }
  }
  return out;
}

void write_adult_fixture(const std::filesystem::path& path, std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> workclass{"Private", "Self-emp-not-inc", "Local-gov", "State-gov"};
  static const std::vector<std::string> races{"White", "Black", "Asian-Pac-Islander", "Other"};
  Rng rng(derive_seed(seed, "adult-fixture"));
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const auto& occupations = adult_occupations();
  const auto& marital = adult_marital_statuses();
  for (std::size_t i = 0; i < n; ++i) {
    const int age = 17 + static_cast<int>(rng.index(60));
    const int edu = 1 + static_cast<int>(rng.index(16));
    const int hours = 20 + static_cast<int>(rng.index(50));
    const int gain = rng.bernoulli(0.08) ? static_cast<int>(rng.index(20000)) : 0;
    const int loss = rng.bernoulli(0.05) ? static_cast<int>(rng.index(2500)) : 0;
    const std::size_t occ = rng.index(occupations.size());
    const std::size_t mar = rng.index(marital.size());
    const double logit = 0.08 * (age - 40) + 0.35 * (edu - 10) + 0.04 * (hours - 40) + (mar == 0 ? 1.2 : -0.6) +
                         (gain > 0 ? 1.5 : 0.0) + 0.5 * rng.normal();
    const bool rich = logit > 0.8;
    const bool unknown = rng.bernoulli(0.02);
    out << age << ", " << workclass[rng.index(workclass.size())] << ", " << 100000 + rng.index(200000)
        << ", Edu" << edu << ", " << edu << ", " << marital[mar] << ", " << (unknown ? "?" : occupations[occ])
        << ", Husband, " << races[rng.index(races.size())] << ", " << (rng.bernoulli(0.5) ? "Male" : "Female")
        << ", " << gain << ", " << loss << ", " << hours << ", United-States, " << (rich ? ">50K" : "<=50K") << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace spectre::data
