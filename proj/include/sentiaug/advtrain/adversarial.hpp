#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "sentiaug/advtrain/config.hpp"
#include "sentiaug/advtrain/data.hpp"
#include "sentiaug/advtrain/history.hpp"
#include "sentiaug/gantext/discriminator.hpp"
#include "sentiaug/gantext/generator.hpp"
#include "sentiaug/numerics/optim.hpp"

namespace sentiaug::train {

// 1 - D_i(x), clamped to [0, 1].
double penalty(double d_real);

struct PenaltyRecord {
  std::vector<std::vector<double>> per_step;  // [b][t], same shape as the sampled tokens
  double mean() const;
};

// D_i for each complete sequence.
using SequenceScorer = std::function<std::vector<double>(const std::vector<Sequence>&)>;

// Per-step expected penalty of a sampled batch (sampled with keep_states).
// Step t averages penalty over n_rollouts completions of tokens[0..t]; the
// final step of a sequence scores the sequence itself.
PenaltyRecord estimate_penalties(const gan::Generator& gen, std::span<const int> categories,
                                 const gan::BatchSample& batch, std::size_t n_rollouts,
                                 const SequenceScorer& scorer, num::Rng& rng);

// Generator loss from discriminator logits of fakes (with grad) and reals
// (treated as constants). Logits are [B] per-row picked heads.
num::Tensor generator_loss(Mutation m, const num::Tensor& fake_logits, const num::Tensor& real_logits);
// Binary real-vs-generated loss for the discriminator heads.
num::Tensor head_loss(const num::Tensor& real_logits, const num::Tensor& fake_logits);

inline constexpr std::size_t kMinFitnessSamples = 32;

// Quality is the mean real-head probability of fresh samples on their own
// category head; diversity the mean per-token NLL on the same samples.
Fitness evaluate_fitness(const gan::Generator& candidate, const gan::Discriminator& disc, std::size_t n_samples,
                         double lambda_d, std::uint64_t seed);

// Index of the highest F; ties go to the lower index.
std::size_t select_candidate(const std::vector<Fitness>& scores);

// Snapshot over categories; gen_for(c) yields the generator for category c.
Snapshot snapshot(const std::function<const gan::Generator&(int)>& gen_for, const GanData& data,
                  const TrainConfig& config, std::uint64_t seed);

using RoundCallback = std::function<void(const RoundRecord&)>;

class SentiganTrainer {
 public:
  SentiganTrainer(std::vector<gan::Generator> generators, gan::Discriminator disc, TrainConfig config);

  RoundRecord run_round(const GanData& data);
  std::vector<RoundRecord> train(const GanData& data, std::optional<std::size_t> rounds = std::nullopt,
                                 const RoundCallback& on_round = {});

  const std::vector<gan::Generator>& generators() const { return gens_; }
  const gan::Discriminator& discriminator() const { return disc_; }
  const TrainConfig& config() const { return cfg_; }
  const std::vector<RoundRecord>& history() const { return history_; }
  std::size_t rounds_done() const { return history_.size(); }

  // Parameters and optimizer moments to `path`, configs and history to `path`.json.
  void save(const std::filesystem::path& path) const;
  static SentiganTrainer load(const std::filesystem::path& path);

 private:
  void discriminator_step(const GanData& data, num::Rng& rng, RoundRecord& rec);
  void generator_steps(num::Rng& rng, RoundRecord& rec);

  std::vector<gan::Generator> gens_;
  gan::Discriminator disc_;
  TrainConfig cfg_;
  std::vector<num::Adam> gen_opts_;
  num::Adam disc_opt_;
  std::vector<RoundRecord> history_;
};

class CatganTrainer {
 public:
  CatganTrainer(gan::Generator generator, gan::Discriminator disc, TrainConfig config);

  RoundRecord run_round(const GanData& data);
  std::vector<RoundRecord> train(const GanData& data, std::optional<std::size_t> rounds = std::nullopt,
                                 const RoundCallback& on_round = {});

  const gan::Generator& generator() const { return gen_; }
  const gan::Discriminator& discriminator() const { return disc_; }
  const TrainConfig& config() const { return cfg_; }
  const std::vector<RoundRecord>& history() const { return history_; }
  std::size_t rounds_done() const { return history_.size(); }

  void save(const std::filesystem::path& path) const;
  static CatganTrainer load(const std::filesystem::path& path);

 private:
  gan::Generator gen_;
  gan::Discriminator disc_;
  TrainConfig cfg_;
  num::Adam gen_opt_;
  num::Adam disc_opt_;
  std::vector<RoundRecord> history_;
};

// Which trainer wrote a checkpoint ("sentigan" or "catgan"); throws CheckpointError.
std::string checkpoint_kind(const std::filesystem::path& path);

}  // namespace sentiaug::train
