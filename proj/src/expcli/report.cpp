#include "sentiaug/expcli/report.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sentiaug/corpus/dataset.hpp"

namespace sentiaug::exp {

namespace {

using nlohmann::json;

const char* kCsvHeader = "section,dataset,model,arm,seed,metric,value";

std::string family_label(Family f) {
  switch (f) {
    case Family::deep_learning: return "Deep learning";
    case Family::machine_learning: return "Machine learning";
    case Family::overall: return "Overall average";
  }
  return "?";
}

bool same(const DiffRow& a, const DiffRow& b) {
  return a.arm == b.arm && a.family == b.family && a.accuracy == b.accuracy && a.macro_f1 == b.macro_f1 &&
         a.models == b.models;
}

bool same(const ModelArmMean& a, const ModelArmMean& b) {
  return a.model_id == b.model_id && a.arm == b.arm && a.accuracy == b.accuracy && a.macro_f1 == b.macro_f1 &&
         a.runs == b.runs;
}

std::string num(double v) { return fmt::format("{}", v); }

void csv_line(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += corpus::csv_escape(fields[i]);
  }
  out += '\n';
}

std::string render_csv(const std::vector<ExperimentReport>& reports) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : reports) {
    for (const auto& run : r.runs) {
      const std::string arm = clf::to_string(run.arm), seed = std::to_string(run.seed);
      const auto& m = run.metrics;
      for (const auto& [name, v] : std::vector<std::pair<std::string, double>>{{"accuracy", m.accuracy},
                                                                               {"macro_precision", m.macro_precision},
                                                                               {"macro_recall", m.macro_recall},
                                                                               {"macro_f1", m.macro_f1}}) {
        csv_line(out, {"run", r.dataset_id, run.model_id, arm, seed, name, num(v)});
      }
      for (std::size_t i = 0; i < m.confusion.size(); ++i)
        for (std::size_t j = 0; j < m.confusion.size(); ++j)
          csv_line(out, {"run", r.dataset_id, run.model_id, arm, seed, fmt::format("confusion:{}:{}", i, j),
                         std::to_string(m.confusion[i][j])});
    }
    for (const auto& m : r.means) {
      const std::string arm = clf::to_string(m.arm);
      csv_line(out, {"mean", r.dataset_id, m.model_id, arm, "", "accuracy", num(m.accuracy)});
      csv_line(out, {"mean", r.dataset_id, m.model_id, arm, "", "macro_f1", num(m.macro_f1)});
      csv_line(out, {"mean", r.dataset_id, m.model_id, arm, "", "runs", std::to_string(m.runs)});
    }
    for (const auto& d : r.differences) {
      const std::string arm = clf::to_string(d.arm), fam = to_string(d.family);
      csv_line(out, {"diff", r.dataset_id, fam, arm, "", "accuracy", num(d.accuracy)});
      csv_line(out, {"diff", r.dataset_id, fam, arm, "", "macro_f1", num(d.macro_f1)});
      csv_line(out, {"diff", r.dataset_id, fam, arm, "", "models", std::to_string(d.models)});
    }
  }
  return out;
}

std::string render_markdown(const std::vector<ExperimentReport>& reports) {
  std::vector<clf::Arm> compared;
  for (auto a : {clf::Arm::balanced, clf::Arm::duplicated})
    for (const auto& r : reports)
      if (std::find(r.arms.begin(), r.arms.end(), a) != r.arms.end()) {
        compared.push_back(a);
        break;
      }
  std::string out = "# Experiment report\n";
  for (auto arm : compared) {
    out += fmt::format("\n## Degree of difference: {} - imbalanced (percentage points)\n\n", clf::to_string(arm));
    out += "| Metric | Model family |";
    std::string rule = "|---|---|";
    for (const auto& r : reports) {
      out += " " + r.dataset_id + " |";
      rule += "---:|";
    }
    out += "\n" + rule + "\n";
    for (int metric = 0; metric < 2; ++metric) {
      for (auto fam : {Family::deep_learning, Family::machine_learning, Family::overall}) {
        out += fmt::format("| {} | {} |", metric == 0 ? "Accuracy" : "F1", family_label(fam));
        for (const auto& r : reports) {
          const auto it = std::find_if(r.differences.begin(), r.differences.end(),
                                       [&](const DiffRow& d) { return d.arm == arm && d.family == fam; });
          if (it == r.differences.end()) {
            out += " n/a |";
          } else {
            out += fmt::format(" {:.2f} |", metric == 0 ? it->accuracy : it->macro_f1);
          }
        }
        out += "\n";
      }
    }
  }
  out += "\n## Mean scores (%)\n\n| Dataset | Model | Family | Arm | Accuracy | Macro-F1 | Runs |\n|---|---|---|---|---:|---:|---:|\n";
  for (const auto& r : reports) {
    for (const auto& m : r.means) {
      out += fmt::format("| {} | {} | {} | {} | {:.2f} | {:.2f} | {} |\n", r.dataset_id, m.model_id,
                         family_label(family_of(m.model_id)), clf::to_string(m.arm), 100.0 * m.accuracy,
                         100.0 * m.macro_f1, m.runs);
    }
  }
  return out;
}

template <class T>
void push_unique(std::vector<T>& v, const T& x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::deep_learning: return "deep_learning";
    case Family::machine_learning: return "machine_learning";
    case Family::overall: return "overall";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  for (auto f : {Family::deep_learning, Family::machine_learning, Family::overall})
    if (to_string(f) == s) return f;
  throw std::invalid_argument("unknown model family: " + s);
}

Family family_of(const std::string& model_id) {
  return clf::is_neural(model_id) ? Family::deep_learning : Family::machine_learning;
}

ExperimentReport summarize(std::string dataset_id, std::vector<std::uint64_t> seeds, std::vector<clf::Arm> arms,
                           std::vector<std::string> models, std::vector<clf::MetricRecord> runs) {
  if (seeds.empty() || models.empty()) throw std::invalid_argument("summarize: need seeds and models");
  if (std::find(arms.begin(), arms.end(), clf::Arm::imbalanced) == arms.end()) {
    throw std::invalid_argument("summarize: the imbalanced arm is required");
  }
  std::map<std::tuple<std::string, clf::Arm, std::uint64_t>, const clf::MetricRecord*> cell;
  for (const auto& r : runs) {
    if (r.dataset_id != dataset_id) throw std::invalid_argument("summarize: run from another dataset");
    if (!cell.emplace(std::make_tuple(r.model_id, r.arm, r.seed), &r).second) {
      throw std::invalid_argument("summarize: duplicate run for " + r.model_id);
    }
  }
  if (cell.size() != seeds.size() * arms.size() * models.size()) throw std::invalid_argument("summarize: run grid incomplete");

  ExperimentReport rep;
  std::map<std::pair<std::string, clf::Arm>, ModelArmMean> mean_of;
  for (const auto& m : models) {
    for (auto a : arms) {
      ModelArmMean mm{m, a, 0.0, 0.0, 0};
      for (auto s : seeds) {
        const auto it = cell.find({m, a, s});
        if (it == cell.end()) throw std::invalid_argument("summarize: missing run " + m + "/" + clf::to_string(a));
        mm.accuracy += it->second->metrics.accuracy;
        mm.macro_f1 += it->second->metrics.macro_f1;
        ++mm.runs;
      }
      mm.accuracy /= static_cast<double>(mm.runs);
      mm.macro_f1 /= static_cast<double>(mm.runs);
      rep.means.push_back(mm);
      mean_of[{m, a}] = mm;
    }
  }
  for (auto a : arms) {
    if (a == clf::Arm::imbalanced) continue;
    DiffRow overall{a, Family::overall, 0.0, 0.0, 0};
    for (auto fam : {Family::deep_learning, Family::machine_learning}) {
      DiffRow row{a, fam, 0.0, 0.0, 0};
      for (const auto& m : models) {
        if (family_of(m) != fam) continue;
        row.accuracy += 100.0 * (mean_of[{m, a}].accuracy - mean_of[{m, clf::Arm::imbalanced}].accuracy);
        row.macro_f1 += 100.0 * (mean_of[{m, a}].macro_f1 - mean_of[{m, clf::Arm::imbalanced}].macro_f1);
        ++row.models;
      }
      if (row.models == 0) continue;
      row.accuracy /= static_cast<double>(row.models);
      row.macro_f1 /= static_cast<double>(row.models);
      rep.differences.push_back(row);
      overall.accuracy += static_cast<double>(row.models) * row.accuracy;
      overall.macro_f1 += static_cast<double>(row.models) * row.macro_f1;
      overall.models += row.models;
    }
    overall.accuracy /= static_cast<double>(overall.models);
    overall.macro_f1 /= static_cast<double>(overall.models);
    rep.differences.push_back(overall);
  }
  rep.dataset_id = std::move(dataset_id);
  rep.seeds = std::move(seeds);
  rep.arms = std::move(arms);
  rep.models = std::move(models);
  rep.runs = std::move(runs);
  return rep;
}

void check_consistency(const ExperimentReport& report) {
  const auto fresh = summarize(report.dataset_id, report.seeds, report.arms, report.models, report.runs);
  if (fresh.means.size() != report.means.size() || fresh.differences.size() != report.differences.size()) {
    throw std::logic_error("report " + report.dataset_id + ": summary tables do not match the runs");
  }
  for (std::size_t i = 0; i < fresh.means.size(); ++i) {
    if (!same(fresh.means[i], report.means[i])) {
      throw std::logic_error("report " + report.dataset_id + ": mean for " + report.means[i].model_id + " does not match the runs");
    }
  }
  for (std::size_t i = 0; i < fresh.differences.size(); ++i) {
    if (!same(fresh.differences[i], report.differences[i])) {
      throw std::logic_error("report " + report.dataset_id + ": difference row " + to_string(report.differences[i].family) +
                             " does not match the runs");
    }
  }
  for (const auto& r : report.runs) {
    const auto rebuilt = clf::metrics_from_confusion(r.metrics.confusion);
    if (rebuilt.accuracy != r.metrics.accuracy || rebuilt.macro_f1 != r.metrics.macro_f1) {
      throw std::logic_error("report " + report.dataset_id + ": run metrics do not match their confusion matrix");
    }
  }
}

ReportFormat parse_format(const std::string& s) {
  if (s == "markdown" || s == "md") return ReportFormat::markdown;
  if (s == "csv") return ReportFormat::csv;
  if (s == "json") return ReportFormat::json;
  throw std::invalid_argument("unknown report format: " + s);
}

std::string render_report(const std::vector<ExperimentReport>& reports, ReportFormat format) {
  if (reports.empty()) throw std::invalid_argument("render_report: no reports");
  for (const auto& r : reports) {
    if (r.runs.empty()) throw std::invalid_argument("render_report: empty report " + r.dataset_id);
    check_consistency(r);
  }
  switch (format) {
    case ReportFormat::markdown: return render_markdown(reports);
    case ReportFormat::csv: return render_csv(reports);
    case ReportFormat::json: {
      const json j = reports.size() == 1 ? json(reports.front()) : json(reports);
      return j.dump(2) + "\n";
    }
  }
  return {};
}

std::string render_report(const ExperimentReport& report, ReportFormat format) {
  return render_report(std::vector<ExperimentReport>{report}, format);
}

void to_json(nlohmann::json& j, const ExperimentReport& r) {
  json arms = json::array(), means = json::array(), diffs = json::array();
  for (auto a : r.arms) arms.push_back(clf::to_string(a));
  for (const auto& m : r.means) {
    means.push_back({{"model_id", m.model_id},
                     {"arm", clf::to_string(m.arm)},
                     {"accuracy", m.accuracy},
                     {"macro_f1", m.macro_f1},
                     {"runs", m.runs}});
  }
  for (const auto& d : r.differences) {
    diffs.push_back({{"arm", clf::to_string(d.arm)},
                     {"family", to_string(d.family)},
                     {"accuracy", d.accuracy},
                     {"macro_f1", d.macro_f1},
                     {"models", d.models}});
  }
  j = json{{"dataset_id", r.dataset_id}, {"seeds", r.seeds}, {"arms", arms},          {"models", r.models},
           {"runs", r.runs},             {"means", means},   {"differences", diffs}};
}

void from_json(const nlohmann::json& j, ExperimentReport& r) {
  r = ExperimentReport{};
  r.dataset_id = j.at("dataset_id").get<std::string>();
  r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  for (const auto& a : j.at("arms")) r.arms.push_back(clf::parse_arm(a.get<std::string>()));
  r.models = j.at("models").get<std::vector<std::string>>();
  r.runs = j.at("runs").get<std::vector<clf::MetricRecord>>();
  for (const auto& m : j.at("means")) {
    r.means.push_back({m.at("model_id").get<std::string>(), clf::parse_arm(m.at("arm").get<std::string>()),
                       m.at("accuracy").get<double>(), m.at("macro_f1").get<double>(), m.at("runs").get<std::size_t>()});
  }
  for (const auto& d : j.at("differences")) {
    r.differences.push_back({clf::parse_arm(d.at("arm").get<std::string>()), parse_family(d.at("family").get<std::string>()),
                             d.at("accuracy").get<double>(), d.at("macro_f1").get<double>(),
                             d.at("models").get<std::size_t>()});
  }
}

std::vector<ExperimentReport> parse_reports_json(const std::string& text) {
  const auto j = json::parse(text);
  if (j.is_array()) return j.get<std::vector<ExperimentReport>>();
  return {j.get<ExperimentReport>()};
}

std::vector<ExperimentReport> parse_reports_csv(const std::string& text) {
  std::istringstream in(text);
  std::vector<corpus::RowError> errors;
  const auto rows = corpus::parse_csv(in, errors);
  if (!errors.empty()) throw std::invalid_argument("report csv: " + errors.front().message);
  if (rows.empty() || rows.front().fields.empty() || rows.front().fields.front() != "section") {
    throw std::invalid_argument("report csv: missing header");
  }

  struct Partial {
    std::vector<std::uint64_t> seeds;
    std::vector<clf::Arm> arms;
    std::vector<std::string> models;
    std::vector<std::tuple<std::string, clf::Arm, std::uint64_t>> order;
    std::map<std::tuple<std::string, clf::Arm, std::uint64_t>, std::map<std::string, std::string>> cells;
    std::vector<std::tuple<std::string, std::string, std::string, std::string>> summary;  // model/family, arm, metric, value
  };
  std::vector<std::string> datasets;
  std::map<std::string, Partial> parts;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != 7) throw std::invalid_argument("report csv: line " + std::to_string(rows[i].line) + " needs 7 fields");
    push_unique(datasets, f[1]);
    auto& p = parts[f[1]];
    if (f[0] == "run") {
      const auto key = std::make_tuple(f[2], clf::parse_arm(f[3]), static_cast<std::uint64_t>(std::stoull(f[4])));
      if (!p.cells.count(key)) p.order.push_back(key);
      push_unique(p.models, f[2]);
      push_unique(p.arms, std::get<1>(key));
      push_unique(p.seeds, std::get<2>(key));
      p.cells[key][f[5]] = f[6];
    } else if (f[0] == "mean" || f[0] == "diff") {
      p.summary.emplace_back(f[2], f[3], f[0] + ":" + f[5], f[6]);
    } else {
      throw std::invalid_argument("report csv: unknown section " + f[0]);
    }
  }

  std::vector<ExperimentReport> out;
  for (const auto& ds : datasets) {
    const auto& p = parts.at(ds);
    std::vector<clf::MetricRecord> runs;
    for (const auto& key : p.order) {
      const auto& vals = p.cells.at(key);
      std::size_t k = 0;
      while (vals.count(fmt::format("confusion:{}:{}", k, k))) ++k;
      std::vector<std::vector<std::size_t>> confusion(k, std::vector<std::size_t>(k));
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) confusion[a][b] = std::stoull(vals.at(fmt::format("confusion:{}:{}", a, b)));
      clf::MetricRecord rec{std::get<0>(key), ds, std::get<1>(key), std::get<2>(key), clf::metrics_from_confusion(confusion)};
      if (num(rec.metrics.accuracy) != vals.at("accuracy") || num(rec.metrics.macro_f1) != vals.at("macro_f1")) {
        throw std::invalid_argument("report csv: run metrics disagree with the confusion matrix");
      }
      runs.push_back(std::move(rec));
    }
    auto rep = summarize(ds, p.seeds, p.arms, p.models, std::move(runs));
    std::vector<std::tuple<std::string, std::string, std::string, std::string>> expect;
    for (const auto& m : rep.means) {
      const std::string arm = clf::to_string(m.arm);
      expect.emplace_back(m.model_id, arm, "mean:accuracy", num(m.accuracy));
      expect.emplace_back(m.model_id, arm, "mean:macro_f1", num(m.macro_f1));
      expect.emplace_back(m.model_id, arm, "mean:runs", std::to_string(m.runs));
    }
    for (const auto& d : rep.differences) {
      const std::string arm = clf::to_string(d.arm), fam = to_string(d.family);
      expect.emplace_back(fam, arm, "diff:accuracy", num(d.accuracy));
      expect.emplace_back(fam, arm, "diff:macro_f1", num(d.macro_f1));
      expect.emplace_back(fam, arm, "diff:models", std::to_string(d.models));
    }
    if (expect != p.summary) throw std::invalid_argument("report csv: summary rows of " + ds + " do not follow from the runs");
    out.push_back(std::move(rep));
  }
  return out;
}

}  // namespace sentiaug::exp
