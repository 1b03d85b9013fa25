#include "spectre/harness/report.hpp"

#include "spectre/data/generators.hpp"
#include "spectre/data/table_io.hpp"
#include "spectre/metrics/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace spectre::harness {

namespace {

using Cell = std::pair<std::string, std::string>;  // dataset, variant

std::size_t variant_rank(const std::string& dataset, const std::string& variant) {
  try {
    const auto& order = data::variants_of(data::parse_family(dataset));
    const auto it = std::find(order.begin(), order.end(), variant);
    if (it != order.end()) return static_cast<std::size_t>(it - order.begin());
  } catch (const InvalidInput&) {
  }
  return 1000;
}

// A dataset known only from failures gets a single "*" column.
std::vector<Cell> ordered_cells(const std::vector<EvalRecord>& records, const std::vector<CellFailure>& failures = {}) {
  std::set<Cell> cells;
  std::set<std::string> datasets;
  for (const auto& r : records) {
    cells.insert({r.dataset, r.variant});
    datasets.insert(r.dataset);
  }
  for (const auto& f : failures) {
    if (!datasets.count(f.dataset)) cells.insert({f.dataset, "*"});
  }
  std::vector<Cell> out(cells.begin(), cells.end());
  std::stable_sort(out.begin(), out.end(), [](const Cell& a, const Cell& b) {
    if (a.first != b.first) return a.first < b.first;
    const auto ra = variant_rank(a.first, a.second);
    const auto rb = variant_rank(b.first, b.second);
    return ra != rb ? ra < rb : a.second < b.second;
  });
  return out;
}

std::vector<std::string> ordered_detectors(const std::vector<EvalRecord>& records,
                                           const std::vector<CellFailure>& failures) {
  std::set<std::string> present;
  for (const auto& r : records) present.insert(r.detector);
  for (const auto& f : failures) {
    if (!f.detector.empty()) present.insert(f.detector);
  }
  std::vector<std::string> out;
  for (const auto& d : all_detectors()) {
    if (present.erase(d)) out.push_back(d);
  }
  out.insert(out.end(), present.begin(), present.end());
  return out;
}

std::optional<double> metric_of(const EvalRecord& r, Metric m) {
  switch (m) {
    case Metric::kAuroc: return r.auroc;
    case Metric::kAupr: return r.aupr;
    case Metric::kFpr95: return r.fpr95;
    case Metric::kConfErr: return r.conf_err;
  }
  return std::nullopt;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

const std::vector<std::string>& palette() {
  static const std::vector<std::string> colors{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
                                               "#393b79", "#637939", "#8c6d31", "#843c39"};
  return colors;
}

struct Series {
  std::string name;
  std::vector<std::optional<double>> values;  // one per group
};

std::string bar_chart(const std::string& title, const std::vector<std::string>& groups, const std::vector<Series>& series) {
  const double bar = 10.0;
  const double gap = 14.0;
  const double left = 50.0;
  const double top = 40.0;
  const double plot_h = 260.0;
  const double group_w = bar * static_cast<double>(std::max<std::size_t>(series.size(), 1)) + gap;
  const double plot_w = group_w * static_cast<double>(groups.size());
  const double legend_w = 170.0;
  const double width = left + plot_w + legend_w + 20.0;
  const double height = std::max(top + plot_h + 120.0, top + 16.0 * static_cast<double>(series.size()) + 20.0);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\"" << fixed(height, 0)
      << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fixed(left, 1) << "\" y=\"20\" font-size=\"13\">" << xml_escape(title) << "</text>\n";
  for (int tick = 0; tick <= 10; tick += 2) {
    const double y = top + plot_h * (1.0 - tick / 10.0);
    svg << "<line x1=\"" << fixed(left, 1) << "\" x2=\"" << fixed(left + plot_w, 1) << "\" y1=\"" << fixed(y, 1)
        << "\" y2=\"" << fixed(y, 1) << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << fixed(left - 6, 1) << "\" y=\"" << fixed(y + 3, 1) << "\" text-anchor=\"end\">"
        << fixed(tick / 10.0, 1) << "</text>\n";
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double x0 = left + gap / 2 + group_w * static_cast<double>(g);
    for (std::size_t s = 0; s < series.size(); ++s) {
      const auto& v = series[s].values[g];
      if (!v) continue;
      const double h = plot_h * std::clamp(*v, 0.0, 1.0);
      svg << "<rect x=\"" << fixed(x0 + bar * static_cast<double>(s), 1) << "\" y=\"" << fixed(top + plot_h - h, 1)
          << "\" width=\"" << fixed(bar - 1, 1) << "\" height=\"" << fixed(h, 1) << "\" fill=\""
          << palette()[s % palette().size()] << "\"><title>" << xml_escape(series[s].name) << " " << fixed(*v, 4)
          << "</title></rect>\n";
    }
    const double cx = x0 + bar * static_cast<double>(series.size()) / 2;
    svg << "<text transform=\"translate(" << fixed(cx, 1) << "," << fixed(top + plot_h + 10, 1)
        << ") rotate(40)\">" << xml_escape(groups[g]) << "</text>\n";
  }
  svg << "<line x1=\"" << fixed(left, 1) << "\" x2=\"" << fixed(left, 1) << "\" y1=\"" << fixed(top, 1) << "\" y2=\""
      << fixed(top + plot_h, 1) << "\" stroke=\"black\"/>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double y = top + 16.0 * static_cast<double>(s);
    const double x = left + plot_w + 20.0;
    svg << "<rect x=\"" << fixed(x, 1) << "\" y=\"" << fixed(y, 1) << "\" width=\"10\" height=\"10\" fill=\""
        << palette()[s % palette().size()] << "\"/>\n";
    svg << "<text x=\"" << fixed(x + 14, 1) << "\" y=\"" << fixed(y + 9, 1) << "\">" << xml_escape(series[s].name)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::vector<std::string> ablation_test_sets(const std::vector<AblationRecord>& records) {
  std::set<std::string> sets;
  for (const auto& r : records) sets.insert(r.test_set);
  std::vector<std::string> out(sets.begin(), sets.end());
  std::stable_sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
    return variant_rank("synthetic", a) < variant_rank("synthetic", b);
  });
  return out;
}

std::vector<std::string> ablation_variants_present(const std::vector<AblationRecord>& records) {
  std::set<std::string> names;
  for (const auto& r : records) names.insert(r.variant);
  std::vector<std::string> out;
  for (auto v : all_ablation_variants()) {
    if (names.count(to_string(v))) out.push_back(to_string(v));
  }
  return out;
}

// Per-seed overall means of one variant.
std::vector<double> overall_per_seed(const std::vector<AblationRecord>& records, const std::string& variant) {
  std::map<std::uint64_t, std::vector<double>> by_seed;
  for (const auto& r : records) {
    if (r.variant == variant) by_seed[r.seed].push_back(r.auroc);
  }
  std::vector<double> out;
  for (const auto& [seed, values] : by_seed) out.push_back(metrics::mean_std(values).mean);
  return out;
}

template <typename T, typename F>
std::vector<T> read_jsonl(const std::filesystem::path& path, F parse) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(parse(Json::parse(line)));
    } catch (const std::exception& e) {
      throw InvalidInput(path.string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

template <typename T>
std::string jsonl(const std::vector<T>& items) {
  std::string out;
  for (const auto& item : items) out += to_json(item).dump() + "\n";
  return out;
}

}  // namespace

std::string to_string(Metric m) {
  switch (m) {
    case Metric::kAuroc: return "auroc";
    case Metric::kAupr: return "aupr";
    case Metric::kFpr95: return "fpr95";
    case Metric::kConfErr: return "conf_err";
  }
  return "auroc";
}

std::string summary_csv(const std::vector<EvalRecord>& records, Metric metric, const std::vector<CellFailure>& failures) {
  const auto cells = ordered_cells(records, failures);
  const auto detectors = ordered_detectors(records, failures);
  const bool lower_better = metric == Metric::kFpr95 || metric == Metric::kConfErr;

  std::map<std::pair<std::string, Cell>, std::vector<double>> values;
  std::set<std::pair<std::string, Cell>> seen;
  for (const auto& r : records) {
    const auto key = std::make_pair(r.detector, Cell{r.dataset, r.variant});
    seen.insert(key);
    if (auto v = metric_of(r, metric)) values[key].push_back(*v);
  }
  std::set<std::pair<std::string, std::string>> failed;  // detector, dataset
  for (const auto& f : failures) failed.insert({f.detector, f.dataset});

  std::map<Cell, double> best;
  for (const auto& [key, v] : values) {
    const double m = metrics::mean_std(v).mean;
    auto [it, inserted] = best.emplace(key.second, m);
    if (!inserted) it->second = lower_better ? std::min(it->second, m) : std::max(it->second, m);
  }

  std::ostringstream out;
  out << "detector";
  for (const auto& c : cells) out << ',' << csv_escape(c.first + "/" + c.second);
  out << ",best\n";
  for (const auto& d : detectors) {
    out << csv_escape(d);
    std::vector<std::string> best_cells;
    for (const auto& c : cells) {
      const auto key = std::make_pair(d, c);
      out << ',';
      if (auto it = values.find(key); it != values.end()) {
        const auto ms = metrics::mean_std(it->second);
        out << metrics::format_mean_std(ms);
        if (ms.mean == best.at(c)) best_cells.push_back(c.first + "/" + c.second);
      } else if (seen.count(key)) {
        out << "null";
      } else if (failed.count({d, c.first}) || failed.count({"", c.first})) {
        out << "FAILED";
      }
    }
    std::string joined;
    for (const auto& b : best_cells) joined += (joined.empty() ? "" : ";") + b;
    out << ',' << csv_escape(joined) << '\n';
  }
  return out.str();
}

std::map<std::string, double> ablation_overall_means(const std::vector<AblationRecord>& records) {
  std::map<std::string, double> out;
  for (const auto& v : ablation_variants_present(records)) out[v] = metrics::mean_std(overall_per_seed(records, v)).mean;
  return out;
}

std::string ablation_csv(const std::vector<AblationRecord>& records) {
  const auto sets = ablation_test_sets(records);
  std::ostringstream out;
  out << "# mean AUROC over seeds; overall = per-seed mean over the anomaly sets (the regular set is the reference "
         "and has no AUROC of its own)\n";
  out << "variant";
  for (const auto& s : sets) out << ',' << s;
  out << ",overall,overall_mean,overall_std\n";
  for (const auto& v : ablation_variants_present(records)) {
    out << v;
    for (const auto& s : sets) {
      std::vector<double> vals;
      for (const auto& r : records) {
        if (r.variant == v && r.test_set == s) vals.push_back(r.auroc);
      }
      out << ',' << (vals.empty() ? std::string() : metrics::format_mean_std(metrics::mean_std(vals)));
    }
    const auto overall = metrics::mean_std(overall_per_seed(records, v));
    out << ',' << metrics::format_mean_std(overall) << ',' << data::format_double(overall.mean) << ','
        << data::format_double(overall.std) << '\n';
  }
  return out.str();
}

std::string auroc_bar_chart_svg(const std::vector<EvalRecord>& records) {
  const auto cells = ordered_cells(records);
  std::vector<std::string> groups;
  for (const auto& c : cells) groups.push_back(c.first + "/" + c.second);
  std::vector<Series> series;
  for (const auto& d : ordered_detectors(records, {})) {
    Series s{d, {}};
    for (const auto& c : cells) {
      std::vector<double> v;
      for (const auto& r : records) {
        if (r.detector == d && r.dataset == c.first && r.variant == c.second) v.push_back(r.auroc);
      }
      s.values.push_back(v.empty() ? std::nullopt : std::optional<double>(metrics::mean_std(v).mean));
    }
    series.push_back(std::move(s));
  }
  return bar_chart("Mean AUROC per anomaly set", groups, series);
}

std::string ablation_bar_chart_svg(const std::vector<AblationRecord>& records) {
  const auto means = ablation_overall_means(records);
  std::vector<std::string> groups;
  Series s{"overall mean AUROC", {}};
  for (const auto& v : ablation_variants_present(records)) {
    groups.push_back(v);
    s.values.push_back(means.at(v));
  }
  return bar_chart("Ablation: overall mean AUROC", groups, {s});
}

std::vector<EvalRecord> read_records(const std::filesystem::path& path) {
  return read_jsonl<EvalRecord>(path, eval_record_from_json);
}

std::vector<AblationRecord> read_ablation_records(const std::filesystem::path& path) {
  return read_jsonl<AblationRecord>(path, ablation_record_from_json);
}

std::vector<CellFailure> read_failures(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  return read_jsonl<CellFailure>(path, cell_failure_from_json);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidInput("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_experiment(const std::filesystem::path& dir, const ExperimentResult& result, const Json& manifest) {
  write_text(dir / "records.jsonl", jsonl(result.records));
  write_text(dir / "failures.jsonl", jsonl(result.failures));
  write_text(dir / "access_log.jsonl", jsonl(result.access));
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  if (!result.records.empty() || !result.failures.empty()) render_report(dir);
}

void write_ablation(const std::filesystem::path& dir, const AblationResult& result, const Json& manifest) {
  write_text(dir / "ablation_records.jsonl", jsonl(result.records));
  write_text(dir / "ablation_failures.jsonl", jsonl(result.failures));
  write_text(dir / "ablation_manifest.json", manifest.dump(2) + "\n");
  if (!result.records.empty()) render_report(dir);
}

void render_report(const std::filesystem::path& dir) {
  bool rendered = false;
  if (std::filesystem::exists(dir / "records.jsonl")) {
    const auto records = read_records(dir / "records.jsonl");
    const auto failures = read_failures(dir / "failures.jsonl");
    if (!records.empty() || !failures.empty()) {
      for (auto m : {Metric::kAuroc, Metric::kAupr, Metric::kFpr95, Metric::kConfErr}) {
        write_text(dir / ("summary_" + to_string(m) + ".csv"), summary_csv(records, m, failures));
      }
      write_text(dir / "auroc_by_anomaly.svg", auroc_bar_chart_svg(records));
      rendered = true;
    }
  }
  if (std::filesystem::exists(dir / "ablation_records.jsonl")) {
    const auto records = read_ablation_records(dir / "ablation_records.jsonl");
    if (!records.empty()) {
      write_text(dir / "ablation.csv", ablation_csv(records));
      write_text(dir / "ablation.svg", ablation_bar_chart_svg(records));
      rendered = true;
    }
  }
  if (!rendered) throw InvalidInput("report: no records under " + dir.string());
}

}  // namespace spectre::harness
