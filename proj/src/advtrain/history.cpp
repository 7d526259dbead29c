#include "sentiaug/advtrain/history.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace sentiaug::train {

namespace {

std::string cell(double v) { return std::isnan(v) ? std::string() : fmt::format("{:.6g}", v); }

nlohmann::json num_or_null(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

double num_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return kNoValue;
  return j.at(key).get<double>();
}

}  // namespace

const CandidateScore* RoundRecord::chosen() const {
  if (selected < 0 || static_cast<std::size_t>(selected) >= candidates.size()) return nullptr;
  return &candidates[static_cast<std::size_t>(selected)];
}

std::string history_csv(const std::vector<RoundRecord>& history) {
  std::ostringstream out;
  out << "round,temperature,d_loss,g_loss,penalty_mean,mutation,f_quality,f_diversity,fitness,aborted,bleu,nll_gen,"
         "nll_div\n";
  for (const auto& r : history) {
    const CandidateScore* c = r.chosen();
    out << r.round << ',' << cell(r.temperature) << ',' << cell(r.d_loss) << ',' << cell(r.g_loss) << ','
        << cell(r.penalty_mean) << ',' << (c ? to_string(c->mutation) : "") << ','
        << (c ? cell(c->fitness.f_quality) : "") << ',' << (c ? cell(c->fitness.f_diversity) : "") << ','
        << (c ? cell(c->fitness.F) : "") << ',' << (r.aborted ? 1 : 0) << ',' << cell(r.bleu) << ','
        << cell(r.nll_gen) << ',' << cell(r.nll_div) << '\n';
  }
  return out.str();
}

void write_history_csv(const std::filesystem::path& path, const std::vector<RoundRecord>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << history_csv(history);
}

void to_json(nlohmann::json& j, const RoundRecord& r) {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : r.candidates) {
    cands.push_back({{"mutation", to_string(c.mutation)},
                     {"f_quality", c.fitness.f_quality},
                     {"f_diversity", c.fitness.f_diversity},
                     {"lambda_d", c.fitness.lambda_d},
                     {"F", c.fitness.F},
                     {"aborted", c.aborted}});
  }
  j = {{"round", r.round},
       {"temperature", num_or_null(r.temperature)},
       {"d_loss", num_or_null(r.d_loss)},
       {"g_loss", num_or_null(r.g_loss)},
       {"penalty_mean", num_or_null(r.penalty_mean)},
       {"candidates", cands},
       {"selected", r.selected},
       {"aborted", r.aborted},
       {"bleu", num_or_null(r.bleu)},
       {"nll_gen", num_or_null(r.nll_gen)},
       {"nll_div", num_or_null(r.nll_div)}};
}

void from_json(const nlohmann::json& j, RoundRecord& r) {
  r.round = j.at("round").get<std::size_t>();
  r.temperature = num_from(j, "temperature");
  r.d_loss = num_from(j, "d_loss");
  r.g_loss = num_from(j, "g_loss");
  r.penalty_mean = num_from(j, "penalty_mean");
  r.candidates.clear();
  for (const auto& c : j.value("candidates", nlohmann::json::array())) {
    r.candidates.push_back({parse_mutation(c.at("mutation").get<std::string>()),
                            {c.at("f_quality").get<double>(), c.at("f_diversity").get<double>(),
                             c.at("lambda_d").get<double>(), c.at("F").get<double>()},
                            c.value("aborted", false)});
  }
  r.selected = j.value("selected", -1);
  r.aborted = j.value("aborted", false);
  r.bleu = num_from(j, "bleu");
  r.nll_gen = num_from(j, "nll_gen");
  r.nll_div = num_from(j, "nll_div");
}

}  // namespace sentiaug::train
