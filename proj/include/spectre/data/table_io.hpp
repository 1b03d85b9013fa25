#pragma once

#include "spectre/data/dataset.hpp"

#include <filesystem>
#include <string>

namespace spectre::data {

enum class TableFormat { kCsv, kRawFloat };

TableFormat parse_table_format(const std::string& text);
/// Format from the file extension: ".csv" is CSV, anything else raw-float.
TableFormat format_from_path(const std::filesystem::path& path);

/// Magic bytes opening a raw-float table. Header: magic, u32 rows, u32 cols
/// (little-endian), then rows * cols float32 values row-major; the last
/// column holds the label.
inline constexpr char kRawMagic[8] = {'S', 'G', 'F', 'T', 'B', 'L', '0', '1'};

/// CSV: header row naming columns, mandatory `label` column, optional
/// `split` column (train|val|test). Rows without a split column are tagged test.
LabeledDataset load_feature_table(const std::filesystem::path& path, TableFormat format);
LabeledDataset load_feature_table(const std::filesystem::path& path);

/// CSV output always carries `label` and `split` columns. Raw-float drops
/// split tags and narrows values to float32.
void write_feature_table(const std::filesystem::path& path, const LabeledDataset& data, TableFormat format);

/// Shortest round-trippable decimal form of `value`.
std::string format_double(double value);

}  // namespace spectre::data
