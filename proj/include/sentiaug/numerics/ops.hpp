#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sentiaug/numerics/random.hpp"
#include "sentiaug/numerics/tensor.hpp"

namespace sentiaug::num {

// Elementwise binary ops broadcast numpy-style (trailing dims aligned, size-1
// dims stretched).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double value);

// [m,k] x [k,n] -> [m,n]. Zero entries of the left operand are skipped, which
// makes one-hot rows as cheap as a table lookup.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor log_sigmoid(const Tensor& x);

// Normalize over the last dimension.
Tensor softmax(const Tensor& x);
Tensor log_softmax(const Tensor& x);

// table [V,d], ids -> [ids.size(), d]
Tensor embedding_lookup(const Tensor& table, std::span<const int> ids);

// Concatenate along the last dimension; leading dims must agree.
Tensor concat(const std::vector<Tensor>& parts);
// Columns [start, start+len) of the last dimension.
Tensor slice_last(const Tensor& x, std::size_t start, std::size_t len);
// [B,C] x T -> [B,T,C]
Tensor stack_steps(const std::vector<Tensor>& steps);
Tensor reshape(const Tensor& x, Shape shape);

// input [B,T,C] (or [T,C]), weight [K*C, F], bias [F] -> [B, T-K+1, F]
Tensor conv1d(const Tensor& input, const Tensor& weight, const Tensor& bias);
// [B,T,F] -> [B,F] (or [T,F] -> [1,F])
Tensor max_pool_over_time(const Tensor& x);

Tensor mean(const Tensor& x);
Tensor sum(const Tensor& x);

// x [B,V] -> [B] picking x[b, ids[b]]
Tensor pick(const Tensor& x, std::span<const int> ids);

// Sum over rows of weights[b] * -log softmax(logits[b])[targets[b]].
Tensor weighted_cross_entropy(const Tensor& logits, std::span<const int> targets,
                              std::span<const double> weights);
// Mean cross-entropy over the batch.
Tensor cross_entropy(const Tensor& logits, std::span<const int> targets);

// Row-wise relaxed categorical sample softmax((logits + noise) / temperature).
// With hard=true the forward value is the argmax one-hot while gradients flow
// through the relaxation.
Tensor gumbel_softmax(const Tensor& logits, double temperature, bool hard, Rng& rng);
Tensor gumbel_softmax(const Tensor& logits, double temperature, bool hard, std::uint64_t seed);
Tensor gumbel_softmax_with_noise(const Tensor& logits, const std::vector<double>& noise,
                                 double temperature, bool hard);
// Forward: one-hot of the row argmax. Backward: identity.
Tensor straight_through_onehot(const Tensor& soft);

enum class OpKind {
  matmul,
  add,
  mul,
  tanh,
  sigmoid,
  relu,
  softmax,
  log,
  embedding_lookup,
  concat,
  conv1d,
  max_pool_over_time,
  mean,
};

std::string_view op_name(OpKind kind);
const std::vector<OpKind>& all_op_kinds();

// Uniform dispatch over the core operator set. embedding_lookup takes the
// ids as a second tensor of integral values.
Tensor forward_op(OpKind kind, const std::vector<Tensor>& inputs);

}  // namespace sentiaug::num
