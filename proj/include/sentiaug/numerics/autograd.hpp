#pragma once

#include <vector>

#include "sentiaug/numerics/tensor.hpp"

namespace sentiaug::num {

// Operations reachable from a root, in topological order: every node's
// inputs appear before it.
class ComputationTape {
 public:
  static ComputationTape record(const Tensor& root);

  const std::vector<Node*>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

 private:
  std::vector<Node*> nodes_;
};

// Reverse-mode sweep from a scalar loss. Leaf gradients accumulate; the
// intermediate graph is released afterwards.
void backward(const Tensor& loss);

}  // namespace sentiaug::num
