#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sentiaug/sentclass/classifier.hpp"

namespace sentiaug::exp {

enum class Family { deep_learning, machine_learning, overall };
std::string to_string(Family f);
Family parse_family(const std::string& s);
Family family_of(const std::string& model_id);

struct ModelArmMean {
  std::string model_id;
  clf::Arm arm = clf::Arm::imbalanced;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::size_t runs = 0;
};

// Mean over models of (mean_seeds(arm) - mean_seeds(imbalanced)), in
// percentage points. The overall row weights the family rows by model count.
struct DiffRow {
  clf::Arm arm = clf::Arm::balanced;
  Family family = Family::overall;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::size_t models = 0;
};

struct ExperimentReport {
  std::string dataset_id;
  std::vector<std::uint64_t> seeds;
  std::vector<clf::Arm> arms;
  std::vector<std::string> models;
  std::vector<clf::MetricRecord> runs;  // seed-major, then arm, then model
  std::vector<ModelArmMean> means;
  std::vector<DiffRow> differences;
};

// Fills means and differences from runs. Throws std::invalid_argument when a
// (model, arm, seed) cell is missing or the imbalanced arm is absent.
ExperimentReport summarize(std::string dataset_id, std::vector<std::uint64_t> seeds, std::vector<clf::Arm> arms,
                           std::vector<std::string> models, std::vector<clf::MetricRecord> runs);

// Throws std::logic_error when means or differences do not follow from runs.
void check_consistency(const ExperimentReport& report);

enum class ReportFormat { markdown, csv, json };
ReportFormat parse_format(const std::string& s);

// Markdown puts one column per report; csv and json are lossless.
std::string render_report(const std::vector<ExperimentReport>& reports, ReportFormat format);
std::string render_report(const ExperimentReport& report, ReportFormat format);

void to_json(nlohmann::json& j, const ExperimentReport& r);
void from_json(const nlohmann::json& j, ExperimentReport& r);

// Accepts a single report object or an array of them.
std::vector<ExperimentReport> parse_reports_json(const std::string& text);
std::vector<ExperimentReport> parse_reports_csv(const std::string& text);

}  // namespace sentiaug::exp
