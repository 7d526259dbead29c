#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sentiaug/gantext/generator.hpp"

namespace sentiaug::metrics {

using Sequence = std::vector<int>;

struct BleuConfig {
  std::size_t max_n = 4;
  double epsilon = 1e-9;  // stands in for a zero clipped-match count
  bool brevity_penalty = true;

  static BleuConfig preset(std::size_t n);
  void validate() const;
};

struct BleuDetail {
  std::vector<double> matches;  // clipped, per order
  std::vector<double> totals;   // hypothesis n-grams, per order
  std::vector<double> precisions;
  double hyp_length = 0.0;
  double ref_length = 0.0;  // sum of closest reference lengths
  double brevity = 1.0;
  double score = 0.0;
};

// Corpus-level BLEU. Every hypothesis is scored against the whole reference set:
// clipping uses the max count of each n-gram over all references, and the
// reference length for a hypothesis is the closest one (shorter on ties).
BleuDetail bleu_detail(const std::vector<Sequence>& references, const std::vector<Sequence>& hypotheses,
                       const BleuConfig& config = {});
double bleu(const std::vector<Sequence>& references, const std::vector<Sequence>& hypotheses,
            const BleuConfig& config = {});
double bleu(const std::vector<std::vector<std::string>>& references,
            const std::vector<std::vector<std::string>>& hypotheses, const BleuConfig& config = {});

// Drops a trailing EOS and anything after the first EOS.
Sequence strip_eos(const Sequence& seq);

// Mean per-token teacher-forced NLL (nats) of real sequences, which must
// already be generator targets (ending in EOS unless truncated). Sequences are
// scored in chunks of kEvalChunk; chunk c draws initial noise from derive_seed(seed, c).
inline constexpr std::size_t kEvalChunk = 64;
double nll_gen(const gan::Generator& gen, int category, const std::vector<Sequence>& sequences,
               std::uint64_t seed = 0);

// Mean per-token NLL of the generator on n_samples of its own multinomial samples.
inline constexpr std::size_t kMinDivSamples = 100;
double nll_div(const gan::Generator& gen, int category, std::size_t n_samples, std::uint64_t seed);

// Fresh multinomial samples (EOS stripped) for BLEU against a reference slice.
std::vector<Sequence> sample_texts(const gan::Generator& gen, int category, std::size_t n, std::uint64_t seed);

}  // namespace sentiaug::metrics
