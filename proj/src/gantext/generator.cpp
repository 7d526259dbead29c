#include "sentiaug/gantext/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

#include "sentiaug/corpus/vocab.hpp"
#include "sentiaug/numerics/ops.hpp"

namespace sentiaug::gan {

namespace {

constexpr std::uint64_t kNoiseStream = 0x401;
constexpr std::uint64_t kTokenStream = 0x402;
constexpr std::uint64_t kRolloutStream = 0x403;

Tensor uniform_param(num::Shape shape, num::Rng& rng, double scale) {
  std::vector<double> v(num::shape_numel(shape));
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return Tensor::from(std::move(shape), std::move(v), true);
}

std::size_t argmax(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

std::size_t sample_tempered(std::span<const double> row, double temperature, num::Rng& rng) {
  const double mx = *std::max_element(row.begin(), row.end());
  std::vector<double> w(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) w[j] = std::exp((row[j] - mx) / temperature);
  return rng.categorical(w);
}

}  // namespace

void GeneratorConfig::validate() const {
  if (vocab_size <= corpus::kReserved) throw std::invalid_argument("GeneratorConfig: vocab_size must exceed the reserved ids");
  if (num_categories == 0) throw std::invalid_argument("GeneratorConfig: num_categories must be positive");
  if (d_emb == 0 || d_h == 0 || max_len == 0) throw std::invalid_argument("GeneratorConfig: sizes must be positive");
  if (conditioning == Conditioning::embedding && d_cat == 0) {
    throw std::invalid_argument("GeneratorConfig: embedding conditioning needs d_cat > 0");
  }
  if (conditioning == Conditioning::instance &&
      (category < 0 || static_cast<std::size_t>(category) >= num_categories)) {
    throw std::invalid_argument("GeneratorConfig: instance category outside [0, num_categories)");
  }
}

LstmState LstmState::rows(std::span<const std::size_t> idx) const {
  const std::size_t d = h.dim(1);
  std::vector<double> hv(idx.size() * d), cv(idx.size() * d);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::copy_n(h.data().begin() + static_cast<std::ptrdiff_t>(idx[i] * d), d, hv.begin() + static_cast<std::ptrdiff_t>(i * d));
    std::copy_n(c.data().begin() + static_cast<std::ptrdiff_t>(idx[i] * d), d, cv.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  return {Tensor::from({idx.size(), d}, std::move(hv)), Tensor::from({idx.size(), d}, std::move(cv))};
}

LstmState LstmState::repeat(std::size_t times) const {
  std::vector<std::size_t> idx;
  for (std::size_t r = 0; r < batch(); ++r)
    for (std::size_t k = 0; k < times; ++k) idx.push_back(r);
  return rows(idx);
}

double Sample::log_prob() const { return std::accumulate(log_probs.begin(), log_probs.end(), 0.0); }

std::vector<double> log_softmax_row(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double v : logits) s += std::exp(v - mx);
  const double lse = mx + std::log(s);
  std::vector<double> out(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) out[j] = logits[j] - lse;
  return out;
}

Generator::Generator(GeneratorConfig config, std::uint64_t init_seed) : cfg_(std::move(config)) {
  cfg_.validate();
  num::Rng rng(init_seed);
  const double s = cfg_.init_scale;
  const std::size_t d_in = cfg_.d_emb + (cfg_.conditioning == Conditioning::embedding ? cfg_.d_cat : 0);
  emb_ = uniform_param({cfg_.vocab_size, cfg_.d_emb}, rng, s);
  if (cfg_.conditioning == Conditioning::embedding) cat_emb_ = uniform_param({cfg_.num_categories, cfg_.d_cat}, rng, s);
  wx_ = uniform_param({d_in, 4 * cfg_.d_h}, rng, s);
  wh_ = uniform_param({cfg_.d_h, 4 * cfg_.d_h}, rng, s);
  b_ = uniform_param({4 * cfg_.d_h}, rng, s);
  wout_ = uniform_param({cfg_.d_h, cfg_.vocab_size}, rng, s);
  bout_ = uniform_param({cfg_.vocab_size}, rng, s);
}

ParameterList Generator::parameters(const std::string& prefix) const {
  ParameterList out = {{prefix + "emb", emb_}};
  if (cat_emb_.defined()) out.push_back({prefix + "cat_emb", cat_emb_});
  out.push_back({prefix + "lstm/wx", wx_});
  out.push_back({prefix + "lstm/wh", wh_});
  out.push_back({prefix + "lstm/b", b_});
  out.push_back({prefix + "out/w", wout_});
  out.push_back({prefix + "out/b", bout_});
  return out;
}

Generator Generator::clone() const {
  Generator g = *this;
  g.emb_ = emb_.clone();
  if (cat_emb_.defined()) g.cat_emb_ = cat_emb_.clone();
  g.wx_ = wx_.clone();
  g.wh_ = wh_.clone();
  g.b_ = b_.clone();
  g.wout_ = wout_.clone();
  g.bout_ = bout_.clone();
  return g;
}

void Generator::check_categories(std::span<const int> categories) const {
  if (categories.empty()) throw std::invalid_argument("Generator: empty category batch");
  for (int c : categories) {
    if (c < 0 || static_cast<std::size_t>(c) >= cfg_.num_categories) {
      throw std::out_of_range("Generator: category id " + std::to_string(c) + " outside [0, " +
                              std::to_string(cfg_.num_categories) + ")");
    }
    if (cfg_.conditioning == Conditioning::instance && c != cfg_.category) {
      throw std::invalid_argument("Generator: instance for category " + std::to_string(cfg_.category) +
                                  " asked to generate category " + std::to_string(c));
    }
  }
}

LstmState Generator::init_state(std::span<const int> categories, num::Rng& noise) const {
  check_categories(categories);
  const std::size_t B = categories.size();
  std::vector<double> h(B * cfg_.d_h, 0.0);
  if (cfg_.noise_init)
    for (auto& v : h) v = noise.normal();
  return {Tensor::from({B, cfg_.d_h}, std::move(h)), Tensor::zeros({B, cfg_.d_h})};
}

LstmState Generator::init_state(std::span<const int> categories, std::uint64_t seed) const {
  num::Rng noise(num::derive_seed(seed, kNoiseStream));
  return init_state(categories, noise);
}

Tensor Generator::input_rows(std::span<const int> categories, std::span<const int> tokens) const {
  Tensor x = num::embedding_lookup(emb_, tokens);
  if (cfg_.conditioning == Conditioning::embedding) x = num::concat({x, num::embedding_lookup(cat_emb_, categories)});
  return x;
}

std::pair<Tensor, LstmState> Generator::step(std::span<const int> categories, const LstmState& state,
                                             std::span<const int> prev_tokens) const {
  check_categories(categories);
  if (prev_tokens.size() != categories.size() || state.batch() != categories.size()) {
    throw num::ShapeError("Generator::step: batch sizes differ (categories " + std::to_string(categories.size()) +
                          ", tokens " + std::to_string(prev_tokens.size()) + ", state " +
                          std::to_string(state.batch()) + ")");
  }
  const std::size_t H = cfg_.d_h;
  Tensor x = input_rows(categories, prev_tokens);
  Tensor gates = num::add(num::add(num::matmul(x, wx_), num::matmul(state.h, wh_)), b_);
  Tensor i = num::sigmoid(num::slice_last(gates, 0, H));
  Tensor f = num::sigmoid(num::slice_last(gates, H, H));
  Tensor g = num::tanh(num::slice_last(gates, 2 * H, H));
  Tensor o = num::sigmoid(num::slice_last(gates, 3 * H, H));
  Tensor c = num::add(num::mul(f, state.c), num::mul(i, g));
  Tensor h = num::mul(o, num::tanh(c));
  Tensor logits = num::add(num::matmul(h, wout_), bout_);
  return {logits, {h, c}};
}

Sample Generator::sample_sequence(int category, SampleOptions opts, std::uint64_t seed) const {
  const int cats[1] = {category};
  return std::move(sample_batch(cats, opts, seed).seqs.front());
}

BatchSample Generator::sample_batch(std::span<const int> categories, SampleOptions opts, std::uint64_t seed) const {
  check_categories(categories);
  if (opts.temperature <= 0.0) throw std::invalid_argument("sample: temperature must be positive");
  const std::size_t max_len = opts.max_len ? opts.max_len : cfg_.max_len;
  const std::size_t B = categories.size(), V = cfg_.vocab_size;
  const bool gumbel = opts.mode == SampleMode::gumbel_st;

  std::optional<num::NoGradGuard> no_grad;
  if (!gumbel) no_grad.emplace();
  num::Rng noise(num::derive_seed(seed, kNoiseStream));
  num::Rng rng(num::derive_seed(seed, kTokenStream));

  BatchSample out;
  out.seqs.resize(B);
  LstmState state = init_state(categories, noise);
  out.init = {state.h.detach(), state.c.detach()};
  std::vector<int> prev(B, corpus::kBos);
  std::vector<bool> done(B, false);
  std::size_t remaining = B;

  for (std::size_t t = 0; t < max_len && remaining > 0; ++t) {
    auto [logits, next] = step(categories, state, prev);
    state = next;
    if (opts.keep_states) out.states.push_back({state.h.detach(), state.c.detach()});
    Tensor soft;
    if (gumbel) soft = num::gumbel_softmax(logits, opts.temperature, false, rng);
    std::vector<int> tokens(B, corpus::kPad);
    const std::vector<bool> was_done = done;
    for (std::size_t b = 0; b < B; ++b) {
      if (done[b]) continue;
      auto row = logits.data().subspan(b * V, V);
      std::size_t tok = 0;
      switch (opts.mode) {
        case SampleMode::greedy: tok = argmax(row); break;
        case SampleMode::multinomial: tok = sample_tempered(row, opts.temperature, rng); break;
        case SampleMode::gumbel_st: tok = argmax(soft.data().subspan(b * V, V)); break;
      }
      const double lp = log_softmax_row(row)[tok];
      out.seqs[b].tokens.push_back(static_cast<int>(tok));
      out.seqs[b].log_probs.push_back(lp);
      tokens[b] = static_cast<int>(tok);
      if (tokens[b] == corpus::kEos) {
        done[b] = true;
        --remaining;
      }
    }
    if (gumbel) {
      Tensor hard = num::straight_through_onehot(soft);
      if (std::find(was_done.begin(), was_done.end(), true) != was_done.end()) {
        std::vector<double> keep(B), fill(B * V, 0.0);
        for (std::size_t b = 0; b < B; ++b) {
          keep[b] = was_done[b] ? 0.0 : 1.0;
          if (was_done[b]) fill[b * V + corpus::kPad] = 1.0;
        }
        hard = num::add(num::mul(hard, Tensor::from({B, 1}, keep)), Tensor::from({B, V}, fill));
      }
      out.soft.push_back(soft);
      out.hard.push_back(hard);
    }
    out.step_tokens.push_back(tokens);
    prev = tokens;
  }
  return out;
}

double Generator::sequence_nll(int category, const std::vector<int>& tokens, std::uint64_t seed) const {
  if (tokens.empty()) throw std::invalid_argument("sequence_nll: empty sequence");
  num::NoGradGuard no_grad;
  const int cats[1] = {category};
  LstmState state = init_state(cats, seed);
  int prev[1] = {corpus::kBos};
  double nll = 0.0;
  for (int tok : tokens) {
    if (tok < 0 || static_cast<std::size_t>(tok) >= cfg_.vocab_size) {
      throw std::out_of_range("sequence_nll: token id " + std::to_string(tok) + " outside vocabulary");
    }
    auto [logits, next] = step(cats, state, prev);
    state = next;
    nll -= log_softmax_row(logits.data())[static_cast<std::size_t>(tok)];
    prev[0] = tok;
  }
  return nll;
}

Tensor Generator::weighted_nll(std::span<const int> categories, const std::vector<std::vector<int>>& seqs,
                               const std::vector<std::vector<double>>& weights, const LstmState& init) const {
  const std::size_t B = categories.size();
  if (seqs.size() != B || weights.size() != B) throw num::ShapeError("weighted_nll: batch sizes differ");
  std::size_t T = 0;
  for (std::size_t b = 0; b < B; ++b) {
    if (weights[b].size() != seqs[b].size()) throw num::ShapeError("weighted_nll: weights/tokens length mismatch");
    T = std::max(T, seqs[b].size());
  }
  Tensor total = Tensor::scalar(0.0);
  LstmState state = init;
  std::vector<int> prev(B, corpus::kBos), targets(B);
  std::vector<double> w(B);
  for (std::size_t t = 0; t < T; ++t) {
    auto [logits, next] = step(categories, state, prev);
    state = next;
    for (std::size_t b = 0; b < B; ++b) {
      const bool live = t < seqs[b].size();
      targets[b] = live ? seqs[b][t] : corpus::kPad;
      w[b] = live ? weights[b][t] : 0.0;
    }
    total = num::add(total, num::weighted_cross_entropy(logits, targets, w));
    prev = targets;
  }
  return total;
}

Tensor Generator::mle_loss(std::span<const int> categories, const std::vector<std::vector<int>>& seqs,
                           const LstmState& init) const {
  std::size_t tokens = 0;
  for (const auto& s : seqs) tokens += s.size();
  if (tokens == 0) throw std::invalid_argument("mle_loss: no tokens");
  std::vector<std::vector<double>> w;
  for (const auto& s : seqs) w.emplace_back(s.size(), 1.0 / static_cast<double>(tokens));
  return weighted_nll(categories, seqs, w, init);
}

std::vector<std::vector<int>> Generator::rollout(int category, const std::vector<int>& prefix, std::size_t n,
                                                 std::uint64_t seed) const {
  if (n == 0) throw std::invalid_argument("rollout: n must be positive");
  if ((!prefix.empty() && prefix.back() == corpus::kEos) || prefix.size() >= cfg_.max_len) {
    return std::vector<std::vector<int>>(n, prefix);
  }
  num::NoGradGuard no_grad;
  const int cats[1] = {category};
  LstmState state = init_state(cats, seed);
  int last[1] = {corpus::kBos};
  for (int tok : prefix) {
    state = step(cats, state, last).second;
    last[0] = tok;
  }
  num::Rng rng(num::derive_seed(seed, kRolloutStream));
  const std::vector<int> rep_cats(n, category), rep_last(n, last[0]);
  auto tails = complete(rep_cats, state.repeat(n), rep_last, prefix.size(), rng);
  std::vector<std::vector<int>> out;
  for (auto& tail : tails) {
    std::vector<int> full = prefix;
    full.insert(full.end(), tail.begin(), tail.end());
    out.push_back(std::move(full));
  }
  return out;
}

std::vector<std::vector<int>> Generator::complete(std::span<const int> categories, const LstmState& state,
                                                  std::span<const int> last_tokens, std::size_t prefix_len,
                                                  num::Rng& rng) const {
  num::NoGradGuard no_grad;
  const std::size_t B = categories.size(), V = cfg_.vocab_size;
  std::vector<std::vector<int>> out(B);
  std::vector<bool> done(B, false);
  for (std::size_t b = 0; b < B; ++b) done[b] = last_tokens[b] == corpus::kEos;
  std::size_t remaining = static_cast<std::size_t>(std::count(done.begin(), done.end(), false));
  LstmState cur = state;
  std::vector<int> prev(last_tokens.begin(), last_tokens.end());
  for (std::size_t len = prefix_len; len < cfg_.max_len && remaining > 0; ++len) {
    auto [logits, next] = step(categories, cur, prev);
    cur = next;
    for (std::size_t b = 0; b < B; ++b) {
      if (done[b]) {
        prev[b] = corpus::kPad;
        continue;
      }
      const int tok = static_cast<int>(sample_tempered(logits.data().subspan(b * V, V), 1.0, rng));
      out[b].push_back(tok);
      prev[b] = tok;
      if (tok == corpus::kEos) {
        done[b] = true;
        --remaining;
      }
    }
  }
  return out;
}

}  // namespace sentiaug::gan
