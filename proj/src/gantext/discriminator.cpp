#include "sentiaug/gantext/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sentiaug/corpus/vocab.hpp"
#include "sentiaug/numerics/ops.hpp"
#include "sentiaug/numerics/random.hpp"

namespace sentiaug::gan {

namespace {

Tensor uniform_param(num::Shape shape, num::Rng& rng, double scale) {
  std::vector<double> v(num::shape_numel(shape));
  for (auto& x : v) x = rng.uniform(-scale, scale);
  return Tensor::from(std::move(shape), std::move(v), true);
}

}  // namespace

ConvTrunk::ConvTrunk(ConvTrunkConfig config, std::uint64_t init_seed) : cfg_(std::move(config)) {
  if (cfg_.vocab_size <= corpus::kReserved) throw std::invalid_argument("ConvTrunk: vocab too small");
  if (cfg_.widths.empty() || cfg_.filters == 0 || cfg_.d_emb == 0) {
    throw std::invalid_argument("ConvTrunk: need at least one width, one filter and d_emb > 0");
  }
  const std::size_t widest = *std::max_element(cfg_.widths.begin(), cfg_.widths.end());
  if (widest == 0 || cfg_.max_len < widest) {
    throw std::invalid_argument("ConvTrunk: max_len " + std::to_string(cfg_.max_len) +
                                " shorter than the widest filter " + std::to_string(widest));
  }
  num::Rng rng(init_seed);
  emb_ = uniform_param({cfg_.vocab_size, cfg_.d_emb}, rng, cfg_.init_scale);
  for (std::size_t k : cfg_.widths) {
    conv_w_.push_back(uniform_param({k * cfg_.d_emb, cfg_.filters}, rng, cfg_.init_scale));
    conv_b_.push_back(uniform_param({cfg_.filters}, rng, cfg_.init_scale));
  }
}

ParameterList ConvTrunk::parameters(const std::string& prefix) const {
  ParameterList out = {{prefix + "emb", emb_}};
  for (std::size_t i = 0; i < cfg_.widths.size(); ++i) {
    const std::string w = std::to_string(cfg_.widths[i]);
    out.push_back({prefix + "conv" + w + "/w", conv_w_[i]});
    out.push_back({prefix + "conv" + w + "/b", conv_b_[i]});
  }
  return out;
}

ConvTrunk ConvTrunk::clone() const {
  ConvTrunk t = *this;
  t.emb_ = emb_.clone();
  for (auto& w : t.conv_w_) w = w.clone();
  for (auto& b : t.conv_b_) b = b.clone();
  return t;
}

Tensor ConvTrunk::pool(const Tensor& embedded) const {
  std::vector<Tensor> pooled;
  for (std::size_t i = 0; i < cfg_.widths.size(); ++i) {
    pooled.push_back(num::max_pool_over_time(num::relu(num::conv1d(embedded, conv_w_[i], conv_b_[i]))));
  }
  return pooled.size() == 1 ? pooled.front() : num::concat(pooled);
}

Tensor ConvTrunk::features(const std::vector<std::vector<int>>& seqs) const {
  if (seqs.empty()) throw std::invalid_argument("ConvTrunk::features: empty batch");
  const std::size_t B = seqs.size(), T = cfg_.max_len;
  std::vector<int> ids(B * T, corpus::kPad);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t t = 0; t < std::min(T, seqs[b].size()); ++t) ids[b * T + t] = seqs[b][t];
  return pool(num::reshape(num::embedding_lookup(emb_, ids), {B, T, cfg_.d_emb}));
}

Tensor ConvTrunk::features_soft(const std::vector<Tensor>& steps) const {
  if (steps.empty()) throw std::invalid_argument("ConvTrunk::features_soft: no steps");
  const std::size_t B = steps.front().dim(0), V = cfg_.vocab_size, T = cfg_.max_len;
  std::vector<Tensor> padded(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(std::min(T, steps.size())));
  if (padded.size() < T) {
    std::vector<double> pad(B * V, 0.0);
    for (std::size_t b = 0; b < B; ++b) pad[b * V + corpus::kPad] = 1.0;
    const Tensor pad_rows = Tensor::from({B, V}, std::move(pad));
    while (padded.size() < T) padded.push_back(pad_rows);
  }
  Tensor flat = num::reshape(num::stack_steps(padded), {B * T, V});
  return pool(num::reshape(num::matmul(flat, emb_), {B, T, cfg_.d_emb}));
}

Discriminator::Discriminator(DiscriminatorConfig config, std::uint64_t init_seed)
    : cfg_(std::move(config)), trunk_(cfg_.trunk, num::derive_seed(init_seed, 1)) {
  if (cfg_.num_categories == 0) throw std::invalid_argument("Discriminator: num_categories must be positive");
  num::Rng rng(num::derive_seed(init_seed, 2));
  w_ = uniform_param({trunk_.feature_dim(), outputs()}, rng, cfg_.trunk.init_scale);
  b_ = uniform_param({outputs()}, rng, cfg_.trunk.init_scale);
}

std::size_t Discriminator::outputs() const {
  return cfg_.head == DiscHead::sentigan ? cfg_.num_categories + 1 : cfg_.num_categories;
}

ParameterList Discriminator::parameters(const std::string& prefix) const {
  ParameterList out = trunk_.parameters(prefix + "trunk/");
  out.push_back({prefix + "head/w", w_});
  out.push_back({prefix + "head/b", b_});
  return out;
}

Discriminator Discriminator::clone() const {
  Discriminator d = *this;
  d.trunk_ = trunk_.clone();
  d.w_ = w_.clone();
  d.b_ = b_.clone();
  return d;
}

Tensor Discriminator::logits(const std::vector<std::vector<int>>& seqs) const {
  return num::add(num::matmul(trunk_.features(seqs), w_), b_);
}

Tensor Discriminator::logits_soft(const std::vector<Tensor>& steps) const {
  return num::add(num::matmul(trunk_.features_soft(steps), w_), b_);
}

std::vector<std::vector<double>> Discriminator::to_probabilities(const Tensor& logits, DiscHead head) {
  const std::size_t B = logits.dim(0), K = logits.dim(1);
  std::vector<std::vector<double>> out(B, std::vector<double>(K));
  for (std::size_t b = 0; b < B; ++b) {
    auto row = logits.data().subspan(b * K, K);
    if (head == DiscHead::sentigan) {
      const double mx = *std::max_element(row.begin(), row.end());
      double s = 0.0;
      for (std::size_t j = 0; j < K; ++j) s += out[b][j] = std::exp(row[j] - mx);
      for (auto& v : out[b]) v /= s;
    } else {
      for (std::size_t j = 0; j < K; ++j) out[b][j] = 1.0 / (1.0 + std::exp(-row[j]));
    }
  }
  return out;
}

std::vector<std::vector<double>> Discriminator::probabilities(const std::vector<std::vector<int>>& seqs) const {
  num::NoGradGuard no_grad;
  return to_probabilities(logits(seqs), cfg_.head);
}

}  // namespace sentiaug::gan
