#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sentiaug/corpus/labeled.hpp"
#include "sentiaug/gantext/generator.hpp"

namespace sentiaug::balance {

enum class TargetPolicy { majority_match };

struct GenerationFilters {
  std::size_t min_len = 1;
  std::size_t max_len = 0;  // 0: no upper bound beyond the generator's own cap
  double max_unk_fraction = 0.2;
  bool dedup = true;
};

struct BalancePlan {
  std::vector<std::string> labels;
  std::vector<std::size_t> real_counts;
  std::vector<std::size_t> targets;
  std::vector<std::size_t> deficits;  // max(0, target - real)
  GenerationFilters filters;
  double oversample_cap = 0.0;  // max synthetic/real per category; 0 = unlimited

  // Records to synthesize for category i: the deficit, limited by the cap.
  std::size_t quota(std::size_t i) const;
  std::size_t total_quota() const;
};

// Stats must come from the train split.
BalancePlan compute_plan(const corpus::ClassStats& train_stats, TargetPolicy policy = TargetPolicy::majority_match,
                         GenerationFilters filters = {}, double oversample_cap = 0.0);

// One generator for every category (CatGAN) or one per category (SentiGAN).
class GeneratorBundle {
 public:
  static GeneratorBundle shared(gan::Generator gen);
  static GeneratorBundle per_category(std::vector<gan::Generator> gens);

  std::size_t num_categories() const;
  const gan::Generator& for_category(int category) const;
  // Multinomial samples with the trailing EOS removed.
  std::vector<std::vector<int>> sample(int category, std::size_t n, std::uint64_t seed) const;

 private:
  std::vector<gan::Generator> gens_;
  bool shared_ = true;
};

struct CategoryReport {
  std::string label;
  std::size_t target = 0;
  std::size_t deficit = 0;
  std::size_t requested = 0;
  std::size_t accepted = 0;
  std::size_t attempts = 0;
  std::size_t rejected_length = 0;
  std::size_t rejected_unk = 0;
  std::size_t rejected_reserved = 0;  // PAD or BOS inside the body
  std::size_t rejected_duplicate = 0;
  std::size_t shortfall = 0;
  double acceptance_rate() const;
};

struct GenerationResult {
  std::vector<corpus::Record> records;  // provenance synthetic, split train
  std::vector<CategoryReport> report;
  bool complete() const;
};

inline constexpr std::size_t kAttemptsPerRecord = 20;
inline constexpr std::size_t kSampleChunk = 128;

// Samples until every quota is met or attempts reach kAttemptsPerRecord x quota.
// Deduplication checks every real record of `corpus` (all splits) and every
// synthetic record accepted so far.
GenerationResult generate_minority(const GeneratorBundle& bundle, const BalancePlan& plan,
                                   const corpus::LabeledCorpus& corpus, std::uint64_t seed,
                                   std::size_t attempts_per_record = kAttemptsPerRecord);

// Random duplication of real train records up to each quota; copies carry
// provenance synthetic so the hygiene checks treat them like generated text.
std::vector<corpus::Record> duplicate_minority(const corpus::LabeledCorpus& corpus, const BalancePlan& plan,
                                               std::uint64_t seed);

// Train block (real train + synthetic) shuffled by seed, followed by the
// val/test records in their original order. An empty synthetic set returns the
// corpus unchanged. Throws std::invalid_argument for a synthetic record that is
// not provenance synthetic / split train.
corpus::LabeledCorpus merge_balanced(const corpus::LabeledCorpus& corpus, const std::vector<corpus::Record>& synthetic,
                                     std::uint64_t seed);

// Throws std::logic_error if any val/test record is synthetic.
void assert_hygiene(const corpus::LabeledCorpus& corpus);

nlohmann::json plan_report_json(const BalancePlan& plan, const std::vector<CategoryReport>& report);

}  // namespace sentiaug::balance
