#include "sentiaug/advtrain/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "sentiaug/genmetrics/metrics.hpp"
#include "sentiaug/numerics/ops.hpp"
#include "sentiaug/numerics/random.hpp"

namespace sentiaug::train {

double penalty(double d_real) {
  if (std::isnan(d_real)) return 1.0;
  return std::clamp(1.0 - d_real, 0.0, 1.0);
}

double PenaltyRecord::mean() const {
  double s = 0.0, n = 0.0;
  for (const auto& row : per_step)
    for (double p : row) {
      s += p;
      n += 1.0;
    }
  return n > 0 ? s / n : 0.0;
}

PenaltyRecord estimate_penalties(const gan::Generator& gen, std::span<const int> categories,
                                 const gan::BatchSample& batch, std::size_t n_rollouts,
                                 const SequenceScorer& scorer, num::Rng& rng) {
  const std::size_t B = batch.seqs.size();
  if (categories.size() != B) throw std::invalid_argument("estimate_penalties: categories/batch size mismatch");
  if (n_rollouts == 0) throw std::invalid_argument("estimate_penalties: n_rollouts must be positive");

  PenaltyRecord rec;
  rec.per_step.resize(B);
  std::vector<Sequence> full;
  std::size_t T = 0;
  for (std::size_t b = 0; b < B; ++b) {
    const auto& toks = batch.seqs[b].tokens;
    if (toks.empty()) throw std::invalid_argument("estimate_penalties: empty sampled sequence");
    rec.per_step[b].assign(toks.size(), 0.0);
    full.push_back(toks);
    T = std::max(T, toks.size());
  }
  const auto final_scores = scorer(full);
  for (std::size_t b = 0; b < B; ++b) rec.per_step[b].back() = penalty(final_scores.at(b));

  for (std::size_t t = 0; t + 1 < T; ++t) {
    std::vector<std::size_t> active;
    for (std::size_t b = 0; b < B; ++b)
      if (batch.seqs[b].tokens.size() > t + 1) active.push_back(b);
    if (active.empty()) continue;
    if (batch.states.size() <= t) throw std::logic_error("estimate_penalties: batch was sampled without keep_states");

    std::vector<int> cats, last;
    for (std::size_t b : active)
      for (std::size_t k = 0; k < n_rollouts; ++k) {
        cats.push_back(categories[b]);
        last.push_back(batch.seqs[b].tokens[t]);
      }
    const auto tails = gen.complete(cats, batch.states[t].rows(active).repeat(n_rollouts), last, t + 1, rng);
    std::vector<Sequence> completions;
    completions.reserve(tails.size());
    for (std::size_t i = 0; i < active.size(); ++i) {
      const auto& toks = batch.seqs[active[i]].tokens;
      for (std::size_t k = 0; k < n_rollouts; ++k) {
        Sequence s(toks.begin(), toks.begin() + static_cast<std::ptrdiff_t>(t + 1));
        const auto& tail = tails[i * n_rollouts + k];
        s.insert(s.end(), tail.begin(), tail.end());
        completions.push_back(std::move(s));
      }
    }
    const auto scores = scorer(completions);
    for (std::size_t i = 0; i < active.size(); ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < n_rollouts; ++k) s += penalty(scores.at(i * n_rollouts + k));
      rec.per_step[active[i]][t] = s / static_cast<double>(n_rollouts);
    }
  }
  return rec;
}

num::Tensor generator_loss(Mutation m, const num::Tensor& fake_logits, const num::Tensor& real_logits) {
  switch (m) {
    case Mutation::nsgan:
      return num::scale(num::mean(num::log_sigmoid(fake_logits)), -1.0);
    case Mutation::lsgan: {
      const num::Tensor gap = num::add_scalar(num::sigmoid(fake_logits), -1.0);
      return num::mean(num::mul(gap, gap));
    }
    case Mutation::ragan: {
      const num::Tensor real = real_logits.detach();
      const num::Tensor fake_vs_real = num::sub(fake_logits, num::mean(real));
      const num::Tensor real_vs_fake = num::sub(real, num::mean(fake_logits));
      return num::scale(num::add(num::mean(num::log_sigmoid(fake_vs_real)),
                                 num::mean(num::log_sigmoid(num::scale(real_vs_fake, -1.0)))),
                        -1.0);
    }
  }
  throw std::invalid_argument("generator_loss: unknown mutation");
}

num::Tensor head_loss(const num::Tensor& real_logits, const num::Tensor& fake_logits) {
  return num::scale(num::add(num::mean(num::log_sigmoid(real_logits)),
                             num::mean(num::log_sigmoid(num::scale(fake_logits, -1.0)))),
                    -1.0);
}

Fitness evaluate_fitness(const gan::Generator& candidate, const gan::Discriminator& disc, std::size_t n_samples,
                         double lambda_d, std::uint64_t seed) {
  if (n_samples < kMinFitnessSamples) {
    throw std::invalid_argument("evaluate_fitness: needs at least " + std::to_string(kMinFitnessSamples) +
                                " samples, got " + std::to_string(n_samples));
  }
  const std::size_t k = disc.config().num_categories;
  std::vector<int> cats(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) cats[i] = static_cast<int>(i % k);
  const auto batch = candidate.sample_batch(cats, {gan::SampleMode::multinomial}, seed);
  std::vector<Sequence> seqs;
  double nll = 0.0, tokens = 0.0;
  for (const auto& s : batch.seqs) {
    seqs.push_back(s.tokens);
    nll -= s.log_prob();
    tokens += static_cast<double>(s.tokens.size());
  }
  const auto probs = disc.probabilities(seqs);
  double q = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) q += probs[i][static_cast<std::size_t>(cats[i])];
  Fitness f;
  f.f_quality = q / static_cast<double>(n_samples);
  f.f_diversity = nll / tokens;
  f.lambda_d = lambda_d;
  f.F = f.f_quality + lambda_d * f.f_diversity;
  return f;
}

std::size_t select_candidate(const std::vector<Fitness>& scores) {
  if (scores.empty()) throw std::invalid_argument("select_candidate: no candidates");
  auto value = [](const Fitness& f) { return std::isnan(f.F) ? -std::numeric_limits<double>::infinity() : f.F; };
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (value(scores[i]) > value(scores[best])) best = i;
  return best;
}

Snapshot snapshot(const std::function<const gan::Generator&(int)>& gen_for, const GanData& data,
                  const TrainConfig& config, std::uint64_t seed) {
  Snapshot s;
  double bleu_sum = 0.0, div_sum = 0.0, nll_total = 0.0, tokens = 0.0;
  std::size_t used = 0;
  metrics::BleuConfig bc;
  bc.max_n = config.bleu_n;
  for (std::size_t c = 0; c < data.num_categories; ++c) {
    if (data.train[c].empty()) continue;
    const int cat = static_cast<int>(c);
    const auto& gen = gen_for(cat);
    std::vector<Sequence> refs;
    for (const auto& r : data.train[c]) refs.push_back(metrics::strip_eos(r));
    bleu_sum += metrics::bleu(refs, metrics::sample_texts(gen, cat, config.eval_samples, num::derive_seed(seed, c, 1)), bc);
    div_sum += metrics::nll_div(gen, cat, config.eval_samples, num::derive_seed(seed, c, 2));
    const auto& held = data.heldout_or_train(cat);
    double n = 0.0;
    for (const auto& h : held) n += static_cast<double>(h.size());
    nll_total += metrics::nll_gen(gen, cat, held, num::derive_seed(seed, c, 3)) * n;
    tokens += n;
    ++used;
  }
  if (used == 0) throw std::invalid_argument("snapshot: no category has training sequences");
  s.bleu = bleu_sum / static_cast<double>(used);
  s.nll_div = div_sum / static_cast<double>(used);
  s.nll_gen = nll_total / tokens;
  return s;
}

}  // namespace sentiaug::train
