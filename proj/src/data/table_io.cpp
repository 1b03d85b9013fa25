#include "spectre/data/table_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace spectre::data {

static_assert(std::endian::native == std::endian::little, "raw-float tables assume a little-endian host");

TableFormat parse_table_format(const std::string& text) {
  if (text == "csv") return TableFormat::kCsv;
  if (text == "raw" || text == "raw-float") return TableFormat::kRawFloat;
  throw InvalidInput("unknown table format '" + text + "'");
}

TableFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? TableFormat::kCsv : TableFormat::kRawFloat;
}

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto result = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), result.ptr);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& text, std::size_t row, const std::string& column) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto result = std::from_chars(begin, end, value);
  if (text.empty() || result.ec != std::errc() || result.ptr != end) {
    throw InvalidInput("row " + std::to_string(row) + ", column '" + column + "': non-numeric value '" + text + "'");
  }
  return value;
}

LabeledDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(path.string() + ": empty file");
  const std::vector<std::string> header = split_fields(line);
  std::ptrdiff_t label_col = -1;
  std::ptrdiff_t split_col = -1;
  std::vector<std::string> feature_names;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "label") {
      label_col = static_cast<std::ptrdiff_t>(c);
    } else if (header[c] == "split") {
      split_col = static_cast<std::ptrdiff_t>(c);
    } else {
      feature_names.push_back(header[c]);
      feature_cols.push_back(c);
    }
  }
  if (label_col < 0) throw InvalidInput(path.string() + ": missing mandatory 'label' column");

  std::vector<double> values;
  LabeledDataset out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw InvalidInput(path.string() + ": row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                         " fields, header has " + std::to_string(header.size()));
    }
    for (std::size_t k = 0; k < feature_cols.size(); ++k) {
      values.push_back(parse_number(fields[feature_cols[k]], row, feature_names[k]));
    }
    const double label = parse_number(fields[static_cast<std::size_t>(label_col)], row, "label");
    if (label != std::floor(label) || label < 0.0) {
      throw InvalidInput(path.string() + ": row " + std::to_string(row) + " has a non-integer or negative label");
    }
    out.labels.push_back(static_cast<int>(label));
    out.split.push_back(split_col >= 0 ? parse_split(fields[static_cast<std::size_t>(split_col)]) : Split::kTest);
  }
  const auto n = static_cast<Eigen::Index>(out.labels.size());
  const auto d = static_cast<Eigen::Index>(feature_cols.size());
  out.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, d);
  out.meta.name = path.stem().string();
  out.meta.columns = std::move(feature_names);
  return out;
}

LabeledDataset load_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  char magic[8];
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&rows), 4);
  in.read(reinterpret_cast<char*>(&cols), 4);
  if (!in || std::memcmp(magic, kRawMagic, 8) != 0) throw InvalidInput(path.string() + ": not a raw-float table");
  if (cols < 1) throw InvalidInput(path.string() + ": header declares no label column");
  const auto expected = static_cast<std::uintmax_t>(rows) * cols * 4 + 16;
  const auto actual = std::filesystem::file_size(path);
  if (actual != expected) {
    throw InvalidInput(path.string() + ": header declares " + std::to_string(rows) + " x " + std::to_string(cols) +
                       " values but the payload holds " + std::to_string((actual - 16) / 4));
  }
  std::vector<float> buffer(static_cast<std::size_t>(rows) * cols);
  in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(buffer.size() * 4));
  LabeledDataset out;
  out.features.resize(rows, cols - 1);
  out.labels.resize(rows);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c + 1 < cols; ++c) out.features(r, c) = buffer[std::size_t{r} * cols + c];
    const float label = buffer[std::size_t{r} * cols + cols - 1];
    if (!(label >= 0.0f) || label != std::floor(label)) {
      throw InvalidInput(path.string() + ": row " + std::to_string(r + 1) + " has an invalid label");
    }
    out.labels[r] = static_cast<int>(label);
  }
  out.split.assign(rows, Split::kTest);
  out.meta.name = path.stem().string();
  for (std::uint32_t c = 0; c + 1 < cols; ++c) out.meta.columns.push_back("f" + std::to_string(c));
  return out;
}

}  // namespace

LabeledDataset load_feature_table(const std::filesystem::path& path, TableFormat format) {
  LabeledDataset out = format == TableFormat::kCsv ? load_csv(path) : load_raw(path);
  out.validate();
  return out;
}

LabeledDataset load_feature_table(const std::filesystem::path& path) {
  return load_feature_table(path, format_from_path(path));
}

void write_feature_table(const std::filesystem::path& path, const LabeledDataset& data, TableFormat format) {
  data.validate();
  if (format == TableFormat::kCsv) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    for (std::size_t c = 0; c < data.cols(); ++c) {
      out << (c < data.meta.columns.size() ? data.meta.columns[c] : "f" + std::to_string(c)) << ',';
    }
    out << "label,split\n";
    for (std::size_t r = 0; r < data.rows(); ++r) {
      for (std::size_t c = 0; c < data.cols(); ++c) {
        out << format_double(data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))) << ',';
      }
      out << data.labels[r] << ',' << to_string(data.split[r]) << '\n';
    }
    if (!out) throw Error("failed writing " + path.string());
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const auto rows = static_cast<std::uint32_t>(data.rows());
  const auto cols = static_cast<std::uint32_t>(data.cols() + 1);
  out.write(kRawMagic, 8);
  out.write(reinterpret_cast<const char*>(&rows), 4);
  out.write(reinterpret_cast<const char*>(&cols), 4);
  std::vector<float> row(cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c + 1 < cols; ++c) row[c] = static_cast<float>(data.features(r, c));
    row[cols - 1] = static_cast<float>(data.labels[r]);
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
  }
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace spectre::data
