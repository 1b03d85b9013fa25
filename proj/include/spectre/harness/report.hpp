#pragma once

#include "spectre/harness/experiment.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace spectre::harness {

enum class Metric { kAuroc, kAupr, kFpr95, kConfErr };
std::string to_string(Metric m);

/// Detector-by-test-set table of "mean±std" cells. Test-set columns are
/// "dataset/variant"; the trailing `best` column lists the columns where the
/// row holds the best mean (lowest for FPR95 and ConfErr). Cells without a
/// value read "null"; cells with failures read "FAILED".
std::string summary_csv(const std::vector<EvalRecord>& records, Metric metric,
                        const std::vector<CellFailure>& failures = {});

/// Per-variant mean±std for each anomaly set and the overall mean. The
/// overall mean is taken per seed over the anomaly sets, then aggregated.
std::string ablation_csv(const std::vector<AblationRecord>& records);

/// Mean overall AUROC per ablation variant.
std::map<std::string, double> ablation_overall_means(const std::vector<AblationRecord>& records);

/// Grouped bar chart of mean AUROC per test set, one bar per detector.
std::string auroc_bar_chart_svg(const std::vector<EvalRecord>& records);
/// Bar chart of overall mean AUROC per ablation variant.
std::string ablation_bar_chart_svg(const std::vector<AblationRecord>& records);

std::vector<EvalRecord> read_records(const std::filesystem::path& path);
std::vector<AblationRecord> read_ablation_records(const std::filesystem::path& path);
std::vector<CellFailure> read_failures(const std::filesystem::path& path);

/// Writes records.jsonl, failures.jsonl, access_log.jsonl and manifest.json,
/// then renders the report.
void write_experiment(const std::filesystem::path& dir, const ExperimentResult& result, const Json& manifest);
/// Writes ablation_records.jsonl, ablation_failures.jsonl and manifest, then
/// renders ablation.csv and its plot.
void write_ablation(const std::filesystem::path& dir, const AblationResult& result, const Json& manifest);

/// Renders summary tables and plots from the record files in `dir`. Refuses
/// a directory without any record.
void render_report(const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace spectre::harness
