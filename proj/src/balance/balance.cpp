#include "sentiaug/balance/balance.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>

#include "sentiaug/corpus/vocab.hpp"
#include "sentiaug/genmetrics/metrics.hpp"
#include "sentiaug/numerics/random.hpp"

namespace sentiaug::balance {

namespace {
constexpr std::uint64_t kDuplicateStream = 0xd0b;
constexpr std::uint64_t kMergeStream = 0xba1;
}  // namespace

std::size_t BalancePlan::quota(std::size_t i) const {
  const std::size_t d = deficits.at(i);
  if (oversample_cap <= 0.0) return d;
  const auto cap = static_cast<std::size_t>(std::floor(oversample_cap * static_cast<double>(real_counts.at(i)) + 1e-9));
  return std::min(d, cap);
}

std::size_t BalancePlan::total_quota() const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < deficits.size(); ++i) s += quota(i);
  return s;
}

BalancePlan compute_plan(const corpus::ClassStats& train_stats, TargetPolicy policy, GenerationFilters filters,
                         double oversample_cap) {
  if (policy != TargetPolicy::majority_match) throw std::invalid_argument("compute_plan: unsupported target policy");
  if (filters.max_unk_fraction < 0.0 || filters.max_unk_fraction > 1.0) {
    throw std::invalid_argument("compute_plan: max_unk_fraction must lie in [0, 1]");
  }
  if (filters.max_len && filters.max_len < filters.min_len) throw std::invalid_argument("compute_plan: max_len < min_len");
  if (oversample_cap < 0.0) throw std::invalid_argument("compute_plan: oversample_cap must be nonnegative");
  BalancePlan p;
  p.labels = train_stats.labels;
  p.real_counts = train_stats.counts;
  p.filters = filters;
  p.oversample_cap = oversample_cap;
  const std::size_t target = train_stats.counts.at(train_stats.majority);
  for (std::size_t c : train_stats.counts) {
    p.targets.push_back(target);
    p.deficits.push_back(target > c ? target - c : 0);
  }
  return p;
}

GeneratorBundle GeneratorBundle::shared(gan::Generator gen) {
  if (gen.config().conditioning != gan::Conditioning::embedding) {
    throw std::invalid_argument("GeneratorBundle::shared: generator must be category-conditioned");
  }
  GeneratorBundle b;
  b.gens_.push_back(std::move(gen));
  b.shared_ = true;
  return b;
}

GeneratorBundle GeneratorBundle::per_category(std::vector<gan::Generator> gens) {
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const auto& c = gens[i].config();
    if (c.conditioning != gan::Conditioning::instance || c.category != static_cast<int>(i)) {
      throw std::invalid_argument("GeneratorBundle::per_category: generator " + std::to_string(i) +
                                  " is not the instance generator of category " + std::to_string(i));
    }
  }
  if (gens.empty()) throw std::invalid_argument("GeneratorBundle::per_category: no generators");
  GeneratorBundle b;
  b.gens_ = std::move(gens);
  b.shared_ = false;
  return b;
}

std::size_t GeneratorBundle::num_categories() const {
  return shared_ ? gens_.front().config().num_categories : gens_.size();
}

const gan::Generator& GeneratorBundle::for_category(int category) const {
  if (category < 0 || static_cast<std::size_t>(category) >= num_categories()) {
    throw std::out_of_range("GeneratorBundle: no generator for category " + std::to_string(category));
  }
  return shared_ ? gens_.front() : gens_[static_cast<std::size_t>(category)];
}

std::vector<std::vector<int>> GeneratorBundle::sample(int category, std::size_t n, std::uint64_t seed) const {
  return metrics::sample_texts(for_category(category), category, n, seed);
}

double CategoryReport::acceptance_rate() const {
  return attempts ? static_cast<double>(accepted) / static_cast<double>(attempts) : 0.0;
}

bool GenerationResult::complete() const {
  return std::all_of(report.begin(), report.end(), [](const CategoryReport& r) { return r.shortfall == 0; });
}

GenerationResult generate_minority(const GeneratorBundle& bundle, const BalancePlan& plan,
                                   const corpus::LabeledCorpus& corpus, std::uint64_t seed,
                                   std::size_t attempts_per_record) {
  const std::size_t k = plan.labels.size();
  if (attempts_per_record == 0) throw std::invalid_argument("generate_minority: attempt budget must be positive");
  if (corpus.label_names != plan.labels) throw std::invalid_argument("generate_minority: plan and corpus categories differ");
  for (std::size_t c = 0; c < k; ++c) {
    if (plan.quota(c) > 0 && c >= bundle.num_categories()) {
      throw std::invalid_argument("generate_minority: bundle has no generator for '" + plan.labels[c] + "'");
    }
  }
  std::set<std::vector<int>> seen;
  if (plan.filters.dedup)
    for (const auto& r : corpus.records) seen.insert(r.tokens);

  GenerationResult out;
  for (std::size_t c = 0; c < k; ++c) {
    CategoryReport rep;
    rep.label = plan.labels[c];
    rep.target = plan.targets[c];
    rep.deficit = plan.deficits[c];
    rep.requested = plan.quota(c);
    const std::size_t budget = attempts_per_record * rep.requested;
    for (std::uint64_t chunk = 0; rep.accepted < rep.requested && rep.attempts < budget; ++chunk) {
      const std::size_t n = std::min(kSampleChunk, budget - rep.attempts);
      for (auto& s : bundle.sample(static_cast<int>(c), n, num::derive_seed(seed, c, chunk))) {
        if (rep.accepted == rep.requested) break;
        ++rep.attempts;
        const std::size_t len = s.size();
        const auto unk = static_cast<std::size_t>(std::count(s.begin(), s.end(), corpus::kUnk));
        const bool reserved = std::any_of(s.begin(), s.end(), [](int t) { return t == corpus::kPad || t == corpus::kBos; });
        if (len < plan.filters.min_len || (plan.filters.max_len && len > plan.filters.max_len)) {
          ++rep.rejected_length;
        } else if (reserved) {
          ++rep.rejected_reserved;
        } else if (static_cast<double>(unk) > plan.filters.max_unk_fraction * static_cast<double>(len)) {
          ++rep.rejected_unk;
        } else if (plan.filters.dedup && !seen.insert(s).second) {
          ++rep.rejected_duplicate;
        } else {
          out.records.push_back({static_cast<int>(c), std::move(s), corpus::Provenance::synthetic, corpus::Split::train});
          ++rep.accepted;
        }
      }
    }
    rep.shortfall = rep.requested - rep.accepted;
    out.report.push_back(rep);
  }
  return out;
}

std::vector<corpus::Record> duplicate_minority(const corpus::LabeledCorpus& corpus, const BalancePlan& plan,
                                               std::uint64_t seed) {
  if (corpus.label_names != plan.labels) throw std::invalid_argument("duplicate_minority: plan and corpus categories differ");
  std::vector<std::vector<const corpus::Record*>> pools(plan.labels.size());
  for (const auto& r : corpus.records)
    if (r.split == corpus::Split::train && r.provenance == corpus::Provenance::real)
      pools.at(static_cast<std::size_t>(r.label)).push_back(&r);
  std::vector<corpus::Record> out;
  for (std::size_t c = 0; c < pools.size(); ++c) {
    const std::size_t q = plan.quota(c);
    if (q == 0) continue;
    if (pools[c].empty()) throw std::invalid_argument("duplicate_minority: no real train records for '" + plan.labels[c] + "'");
    num::Rng rng(num::derive_seed(seed, kDuplicateStream, c));
    for (std::size_t i = 0; i < q; ++i) {
      corpus::Record r = *pools[c][rng.index(pools[c].size())];
      r.provenance = corpus::Provenance::synthetic;
      out.push_back(std::move(r));
    }
  }
  return out;
}

void assert_hygiene(const corpus::LabeledCorpus& corpus) {
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    const auto& r = corpus.records[i];
    if (r.provenance == corpus::Provenance::synthetic && r.split != corpus::Split::train) {
      throw std::logic_error("hygiene violation: synthetic record " + std::to_string(i) + " in " + corpus::to_string(r.split));
    }
  }
}

corpus::LabeledCorpus merge_balanced(const corpus::LabeledCorpus& corpus, const std::vector<corpus::Record>& synthetic,
                                     std::uint64_t seed) {
  for (std::size_t i = 0; i < synthetic.size(); ++i) {
    const auto& r = synthetic[i];
    if (r.provenance != corpus::Provenance::synthetic) {
      throw std::invalid_argument("merge_balanced: record " + std::to_string(i) + " is not marked synthetic");
    }
    if (r.split != corpus::Split::train) {
      throw std::invalid_argument("merge_balanced: synthetic record " + std::to_string(i) + " targets " +
                                  corpus::to_string(r.split));
    }
    if (r.label < 0 || static_cast<std::size_t>(r.label) >= corpus.label_names.size()) {
      throw std::invalid_argument("merge_balanced: synthetic record " + std::to_string(i) + " has an unknown category");
    }
  }
  assert_hygiene(corpus);
  if (synthetic.empty()) return corpus;

  corpus::LabeledCorpus out;
  out.label_names = corpus.label_names;
  std::vector<corpus::Record> train, rest;
  for (const auto& r : corpus.records) (r.split == corpus::Split::train ? train : rest).push_back(r);
  train.insert(train.end(), synthetic.begin(), synthetic.end());
  num::Rng rng(num::derive_seed(seed, kMergeStream));
  std::shuffle(train.begin(), train.end(), rng.engine());
  out.records = std::move(train);
  out.records.insert(out.records.end(), rest.begin(), rest.end());
  assert_hygiene(out);
  return out;
}

nlohmann::json plan_report_json(const BalancePlan& plan, const std::vector<CategoryReport>& report) {
  nlohmann::json cats = nlohmann::json::array();
  for (std::size_t i = 0; i < plan.labels.size(); ++i) {
    nlohmann::json c = {{"label", plan.labels[i]},
                        {"real", plan.real_counts[i]},
                        {"target", plan.targets[i]},
                        {"deficit", plan.deficits[i]},
                        {"requested", plan.quota(i)}};
    if (i < report.size()) {
      const auto& r = report[i];
      c["accepted"] = r.accepted;
      c["attempts"] = r.attempts;
      c["rejected"] = {{"length", r.rejected_length},
                       {"unk", r.rejected_unk},
                       {"reserved", r.rejected_reserved},
                       {"duplicate", r.rejected_duplicate}};
      c["shortfall"] = r.shortfall;
      c["acceptance_rate"] = r.acceptance_rate();
    }
    cats.push_back(std::move(c));
  }
  return {{"policy", "majority_match"},
          {"oversample_cap", plan.oversample_cap},
          {"filters",
           {{"min_len", plan.filters.min_len},
            {"max_len", plan.filters.max_len},
            {"max_unk_fraction", plan.filters.max_unk_fraction},
            {"dedup", plan.filters.dedup}}},
          {"categories", cats}};
}

}  // namespace sentiaug::balance
