#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles/bleu_oracle.hpp"
#include "sentiaug/corpus/vocab.hpp"
#include "sentiaug/genmetrics/metrics.hpp"
#include "sentiaug/numerics/autograd.hpp"
#include "sentiaug/numerics/optim.hpp"

namespace metrics = sentiaug::metrics;
namespace gan = sentiaug::gan;
namespace num = sentiaug::num;
namespace corpus = sentiaug::corpus;
using Seqs = std::vector<std::vector<int>>;

namespace {

Seqs random_seqs(std::mt19937_64& gen, std::size_t n, int vocab, std::size_t max_len) {
  Seqs out(n);
  for (auto& s : out) {
    s.resize(1 + gen() % max_len);
    for (auto& t : s) t = static_cast<int>(gen() % static_cast<std::uint64_t>(vocab));
  }
  return out;
}

gan::GeneratorConfig tiny(std::size_t vocab) {
  gan::GeneratorConfig c;
  c.vocab_size = vocab;
  c.num_categories = 2;
  c.d_emb = 6;
  c.d_cat = 2;
  c.d_h = 8;
  c.max_len = 8;
  return c;
}

void set_param(const gan::Generator& g, const std::string& name, double value) {
  for (auto& p : g.parameters())
    if (p.name == name)
      for (double& v : p.tensor.mutable_data()) v = value;
}

}  // namespace

TEST(Bleu, IdenticalCorpusScoresOne) {
  const Seqs refs = {{1, 2, 3, 4, 5}, {6, 7, 8, 9}, {5, 4, 3, 2, 1, 0}};
  EXPECT_NEAR(metrics::bleu(refs, refs), 1.0, 1e-12);
  EXPECT_NEAR(metrics::bleu(refs, refs, metrics::BleuConfig::preset(2)), 1.0, 1e-12);
}

TEST(Bleu, NoUnigramOverlapFallsToEpsilonFloor) {
  const Seqs refs = {{1, 2, 3}};
  const Seqs hyps = {{7, 8, 9}};
  for (std::size_t n = 1; n <= 4; ++n) {
    metrics::BleuConfig cfg;
    cfg.max_n = n;
    EXPECT_LE(metrics::bleu(refs, hyps, cfg), cfg.epsilon);
  }
}

TEST(Bleu, ShortHypothesisBrevityPenalty) {
  metrics::BleuConfig cfg;
  cfg.max_n = 1;
  const auto d = metrics::bleu_detail({{1, 2, 3}}, {{1, 2}}, cfg);
  EXPECT_DOUBLE_EQ(d.precisions[0], 1.0);
  EXPECT_NEAR(d.brevity, std::exp(1.0 - 3.0 / 2.0), 1e-15);
  EXPECT_NEAR(metrics::bleu({{"the", "cat", "sat"}}, {{"the", "cat"}}, cfg), 0.6065306597126334, 1e-12);
  cfg.brevity_penalty = false;
  EXPECT_DOUBLE_EQ(metrics::bleu({{1, 2, 3}}, {{1, 2}}, cfg), 1.0);
}

TEST(Bleu, ClipsRepeatedNgrams) {
  metrics::BleuConfig cfg;
  cfg.max_n = 1;
  const auto d = metrics::bleu_detail({{4, 5, 6, 7}}, {{4, 4, 4, 4}}, cfg);
  EXPECT_DOUBLE_EQ(d.matches[0], 1.0);
  EXPECT_DOUBLE_EQ(d.totals[0], 4.0);
}

TEST(Bleu, MatchesBruteForceOracleOnRandomCases) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const auto refs = random_seqs(gen, 1 + gen() % 5, 5, 8);
    const auto hyps = random_seqs(gen, 1 + gen() % 5, 5, 8);
    const std::size_t n = 1 + gen() % 4;
    metrics::BleuConfig cfg;
    cfg.max_n = n;
    EXPECT_NEAR(metrics::bleu(refs, hyps, cfg), oracle::corpus_bleu(refs, hyps, n), 1e-9) << "trial " << trial;
  }
}

TEST(Bleu, RangeAndPermutationInvariance) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto refs = random_seqs(gen, 4, 4, 6);
    auto hyps = random_seqs(gen, 6, 4, 6);
    const double s = metrics::bleu(refs, hyps, metrics::BleuConfig::preset(2));
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    std::shuffle(hyps.begin(), hyps.end(), gen);
    EXPECT_DOUBLE_EQ(metrics::bleu(refs, hyps, metrics::BleuConfig::preset(2)), s);
  }
}

TEST(Bleu, AddingAReferenceCopyNeverLowersClippedMatches) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto refs = random_seqs(gen, 3, 5, 7);
    auto hyps = random_seqs(gen, 3, 5, 7);
    const auto before = metrics::bleu_detail(refs, hyps);
    hyps.push_back(refs[gen() % refs.size()]);
    const auto after = metrics::bleu_detail(refs, hyps);
    for (std::size_t n = 0; n < 4; ++n) EXPECT_GE(after.matches[n], before.matches[n]);
  }
}

TEST(Bleu, RejectsEmptyInputs) {
  EXPECT_THROW(metrics::bleu(Seqs{{1}}, Seqs{}), std::invalid_argument);
  EXPECT_THROW(metrics::bleu(Seqs{}, Seqs{{1}}), std::invalid_argument);
  metrics::BleuConfig cfg;
  cfg.max_n = 0;
  EXPECT_THROW(metrics::bleu(Seqs{{1}}, Seqs{{1}}, cfg), std::invalid_argument);
  EXPECT_THROW(metrics::BleuConfig::preset(6), std::invalid_argument);
}

TEST(Nll, UniformModelGivesLogV) {
  gan::Generator g(tiny(16), 1);
  set_param(g, "out/w", 0.0);
  set_param(g, "out/b", 0.0);
  const Seqs real = {{5, 6, corpus::kEos}, {7, 8, 9, 10, corpus::kEos}};
  EXPECT_NEAR(metrics::nll_gen(g, 0, real), std::log(16.0), 1e-12);
  EXPECT_NEAR(metrics::nll_div(g, 1, 100, 3), std::log(16.0), 1e-12);
}

TEST(Nll, PeakedGeneratorHasNearZeroDiversity) {
  gan::Generator g(tiny(16), 2);
  set_param(g, "out/w", 0.0);
  set_param(g, "out/b", 0.0);
  for (auto& p : g.parameters())
    if (p.name == "out/b") p.tensor.mutable_data()[corpus::kEos] = 40.0;
  EXPECT_LT(metrics::nll_div(g, 0, 200, 1), 1e-12);
  EXPECT_GE(metrics::nll_div(g, 0, 200, 1), 0.0);
}

TEST(Nll, MemorizingOneSequenceHurtsCoverage) {
  gan::Generator g(tiny(12), 3);
  num::Adam opt(g.parameters(), {.lr = 0.05});
  const Seqs memorized = {{5, 6, 7, 8, corpus::kEos}};
  const int cats[1] = {0};
  for (int i = 0; i < 400; ++i) {
    num::backward(g.mle_loss(cats, memorized, g.init_state(cats, std::uint64_t{0})));
    opt.step();
  }
  EXPECT_LT(metrics::nll_gen(g, 0, memorized), 0.05);
  const Seqs others = {{9, 10, 11, corpus::kEos}, {11, 9, corpus::kEos}, {10, 10, 4, 9, corpus::kEos}};
  EXPECT_GT(metrics::nll_gen(g, 0, others), std::log(12.0));
  EXPECT_LT(metrics::nll_div(g, 0, 100, 5), 0.05);
}

TEST(Nll, NonnegativeReproducibleAndGuarded) {
  gan::Generator g(tiny(20), 4);
  std::mt19937_64 gen(9);
  auto real = random_seqs(gen, 40, 20, 7);
  for (auto& s : real) s.push_back(corpus::kEos);
  const double ng = metrics::nll_gen(g, 1, real);
  EXPECT_GE(ng, 0.0);
  EXPECT_LT(ng, 1.05 * std::log(20.0));
  const double a = metrics::nll_div(g, 0, 150, 11);
  EXPECT_GE(a, 0.0);
  EXPECT_DOUBLE_EQ(a, metrics::nll_div(g, 0, 150, 11));
  EXPECT_THROW(metrics::nll_div(g, 0, 99, 11), std::invalid_argument);
  EXPECT_THROW(metrics::nll_gen(g, 0, {}), std::invalid_argument);
}

TEST(Nll, StripEos) {
  EXPECT_EQ(metrics::strip_eos({5, 6, corpus::kEos}), (std::vector<int>{5, 6}));
  EXPECT_EQ(metrics::strip_eos({5, 6}), (std::vector<int>{5, 6}));
  EXPECT_TRUE(metrics::strip_eos({corpus::kEos, 5}).empty());
}
