#pragma once

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sentiaug/advtrain/config.hpp"

namespace sentiaug::train {

inline constexpr double kNoValue = std::numeric_limits<double>::quiet_NaN();

struct Fitness {
  double f_quality = 0.0;
  double f_diversity = 0.0;
  double lambda_d = 0.0;
  double F = 0.0;
};

struct CandidateScore {
  Mutation mutation = Mutation::nsgan;
  Fitness fitness;
  bool aborted = false;
};

struct RoundRecord {
  std::size_t round = 0;
  double temperature = kNoValue;
  double d_loss = kNoValue;
  double g_loss = kNoValue;
  double penalty_mean = kNoValue;
  std::vector<CandidateScore> candidates;
  int selected = -1;
  bool aborted = false;
  // Metric snapshot; NaN outside eval rounds.
  double bleu = kNoValue;
  double nll_gen = kNoValue;
  double nll_div = kNoValue;

  const CandidateScore* chosen() const;
};

void write_history_csv(const std::filesystem::path& path, const std::vector<RoundRecord>& history);
std::string history_csv(const std::vector<RoundRecord>& history);

void to_json(nlohmann::json& j, const RoundRecord& r);
void from_json(const nlohmann::json& j, RoundRecord& r);

}  // namespace sentiaug::train
