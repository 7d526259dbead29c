#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sentiaug/numerics/optim.hpp"
#include "sentiaug/numerics/random.hpp"
#include "sentiaug/numerics/tensor.hpp"

namespace sentiaug::gan {

using num::ParameterList;
using num::Tensor;

// instance: one generator per category (SentiGAN). embedding: one shared
// generator with a learned category vector appended to every input (CatGAN).
enum class Conditioning { instance, embedding };

struct GeneratorConfig {
  std::size_t vocab_size = 0;
  std::size_t num_categories = 1;
  Conditioning conditioning = Conditioning::embedding;
  int category = 0;  // instance mode only
  bool noise_init = false;
  std::size_t d_emb = 32;
  std::size_t d_cat = 8;
  std::size_t d_h = 64;
  std::size_t max_len = 32;
  double init_scale = 0.08;

  void validate() const;
};

struct LstmState {
  Tensor h;  // [B, d_h]
  Tensor c;  // [B, d_h]
  std::size_t batch() const { return h.dim(0); }
  LstmState rows(std::span<const std::size_t> idx) const;  // detached copy of selected rows
  LstmState repeat(std::size_t times) const;                // row r -> rows r*times .. r*times+times-1
};

enum class SampleMode { greedy, multinomial, gumbel_st };

struct SampleOptions {
  SampleMode mode = SampleMode::multinomial;
  double temperature = 1.0;
  std::size_t max_len = 0;  // 0 -> config max_len
  bool keep_states = false;
};

struct Sample {
  std::vector<int> tokens;        // ends with EOS unless max_len was reached
  std::vector<double> log_probs;  // log P(token) under the untempered model
  double log_prob() const;
};

struct BatchSample {
  std::vector<Sample> seqs;
  // Step t: token fed back at t+1 for every row (PAD once a row is finished).
  std::vector<std::vector<int>> step_tokens;
  // With keep_states: states[t] is the recurrent state after step t.
  std::vector<LstmState> states;
  // Gumbel mode: relaxed rows and straight-through one-hot rows per step, [B, V].
  // Rows of finished sequences are constant PAD one-hots in `hard`.
  std::vector<Tensor> soft;
  std::vector<Tensor> hard;
  LstmState init;
};

class Generator {
 public:
  Generator(GeneratorConfig config, std::uint64_t init_seed);

  const GeneratorConfig& config() const { return cfg_; }
  ParameterList parameters(const std::string& prefix = "") const;
  Generator clone() const;

  // Zeros, or h ~ N(0, 1) per row when noise_init is set.
  LstmState init_state(std::span<const int> categories, num::Rng& noise) const;
  LstmState init_state(std::span<const int> categories, std::uint64_t seed) const;

  // One recurrent step; returns logits [B, V] and the advanced state.
  std::pair<Tensor, LstmState> step(std::span<const int> categories, const LstmState& state,
                                    std::span<const int> prev_tokens) const;

  // Seeded sampling. The initial noise for seed s is the same one
  // sequence_nll(…, s) uses.
  Sample sample_sequence(int category, SampleOptions opts, std::uint64_t seed) const;
  BatchSample sample_batch(std::span<const int> categories, SampleOptions opts, std::uint64_t seed) const;

  // -sum_t log P(y_t | y_<t, category), teacher forced from BOS.
  double sequence_nll(int category, const std::vector<int>& tokens, std::uint64_t seed = 0) const;

  // Differentiable sum_b sum_t weights[b][t] * -log P(seq[b][t]); teacher forced from `init`.
  Tensor weighted_nll(std::span<const int> categories, const std::vector<std::vector<int>>& seqs,
                      const std::vector<std::vector<double>>& weights, const LstmState& init) const;
  // Mean per-token NLL over the batch (the MLE objective).
  Tensor mle_loss(std::span<const int> categories, const std::vector<std::vector<int>>& seqs,
                  const LstmState& init) const;

  // Multinomial completions of the prefix; each extends to EOS or max_len.
  std::vector<std::vector<int>> rollout(int category, const std::vector<int>& prefix, std::size_t n,
                                        std::uint64_t seed) const;
  // Continues every row from `state` after feeding last_tokens; returns only the continuations.
  std::vector<std::vector<int>> complete(std::span<const int> categories, const LstmState& state,
                                         std::span<const int> last_tokens, std::size_t prefix_len,
                                         num::Rng& rng) const;

 private:
  void check_categories(std::span<const int> categories) const;
  Tensor input_rows(std::span<const int> categories, std::span<const int> tokens) const;

  GeneratorConfig cfg_;
  Tensor emb_, cat_emb_, wx_, wh_, b_, wout_, bout_;
};

// Natural-log softmax of one row, computed in double precision.
std::vector<double> log_softmax_row(std::span<const double> logits);

}  // namespace sentiaug::gan
