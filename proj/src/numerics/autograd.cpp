#include "sentiaug/numerics/autograd.hpp"

#include <unordered_set>

namespace sentiaug::num {

ComputationTape ComputationTape::record(const Tensor& root) {
  ComputationTape tape;
  if (!root.defined()) return tape;
  std::unordered_set<Node*> seen;
  // Iterative post-order DFS so long recurrent graphs do not blow the stack.
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  seen.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
      continue;
    }
    tape.nodes_.push_back(node);
    stack.pop_back();
  }
  return tape;
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ShapeError("backward: loss must be a scalar, got shape " +
                     (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
  }
  if (!loss.requires_grad()) {
    throw std::invalid_argument("backward: loss does not depend on any parameter");
  }
  auto tape = ComputationTape::record(loss);
  Node* root = loss.node();
  root->ensure_grad();
  root->grad[0] += 1.0;

  const auto& nodes = tape.nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    Node* node = *it;
    if (!node->backward_fn) continue;
    for (auto& p : node->parents) {
      if (p->requires_grad) p->ensure_grad();
    }
    node->backward_fn(*node);
  }
  // Release the graph: interior grads and parent links are no longer needed.
  for (Node* node : nodes) {
    if (node->is_leaf()) continue;
    node->backward_fn = nullptr;
    node->parents.clear();
    node->grad.clear();
    node->grad.shrink_to_fit();
  }
}

}  // namespace sentiaug::num
