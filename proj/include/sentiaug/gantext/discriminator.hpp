#pragma once

#include <cstdint>
#include <vector>

#include "sentiaug/numerics/optim.hpp"
#include "sentiaug/numerics/tensor.hpp"

namespace sentiaug::gan {

using num::ParameterList;
using num::Tensor;

struct ConvTrunkConfig {
  std::size_t vocab_size = 0;
  std::size_t d_emb = 32;
  std::vector<std::size_t> widths = {2, 3, 4};
  std::size_t filters = 32;
  std::size_t max_len = 32;
  double init_scale = 0.08;
};

// Embedding -> conv1d per width -> ReLU -> max over time -> concat.
// Inputs are PAD-extended (or truncated) to max_len.
class ConvTrunk {
 public:
  ConvTrunk(ConvTrunkConfig config, std::uint64_t init_seed);

  const ConvTrunkConfig& config() const { return cfg_; }
  std::size_t feature_dim() const { return cfg_.filters * cfg_.widths.size(); }
  ParameterList parameters(const std::string& prefix) const;
  ConvTrunk clone() const;

  Tensor features(const std::vector<std::vector<int>>& seqs) const;  // [B, feature_dim]
  // steps[t] is [B, V]; soft rows multiply the embedding table.
  Tensor features_soft(const std::vector<Tensor>& steps) const;

 private:
  Tensor pool(const Tensor& embedded) const;  // [B, T, d] -> [B, feature_dim]

  ConvTrunkConfig cfg_;
  Tensor emb_;
  std::vector<Tensor> conv_w_, conv_b_;
};

// sentigan: (k+1)-way softmax, index k = "generated".
// catgan: k independent sigmoid real/fake heads.
enum class DiscHead { sentigan, catgan };

struct DiscriminatorConfig {
  ConvTrunkConfig trunk;
  DiscHead head = DiscHead::sentigan;
  std::size_t num_categories = 2;
};

class Discriminator {
 public:
  Discriminator(DiscriminatorConfig config, std::uint64_t init_seed);

  const DiscriminatorConfig& config() const { return cfg_; }
  std::size_t outputs() const;
  ParameterList parameters(const std::string& prefix = "") const;
  Discriminator clone() const;

  Tensor logits(const std::vector<std::vector<int>>& seqs) const;
  Tensor logits_soft(const std::vector<Tensor>& steps) const;

  // Row-wise probabilities: softmax (sentigan) or per-head sigmoid (catgan).
  std::vector<std::vector<double>> probabilities(const std::vector<std::vector<int>>& seqs) const;
  static std::vector<std::vector<double>> to_probabilities(const Tensor& logits, DiscHead head);

 private:
  DiscriminatorConfig cfg_;
  ConvTrunk trunk_;
  Tensor w_, b_;
};

}  // namespace sentiaug::gan
