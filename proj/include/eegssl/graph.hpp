#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eegssl/tensor.hpp"

namespace eegssl {

struct NodeId {
  std::size_t index = 0;
  bool operator==(const NodeId&) const = default;
};

/// Reverse-mode tape. Nodes are appended in evaluation order and may only
/// consume earlier nodes, so reverse insertion order is a valid topological
/// order for the backward sweep.
template <typename T>
class Graph {
 public:
  /// Propagates the node's gradient into the gradients of its inputs.
  using BackwardFn = std::function<void(Graph&, NodeId self)>;

  NodeId constant(Tensor<T> value);
  /// Gradient-tracked leaf bound to a parameter name; one node per name.
  NodeId parameter(const std::string& name, const Tensor<T>& value);
  NodeId record(Tensor<T> value, std::vector<NodeId> inputs, BackwardFn backward);

  const Tensor<T>& value(NodeId id) const { return nodes_.at(id.index).value; }
  bool requires_grad(NodeId id) const { return nodes_.at(id.index).requires_grad; }
  /// Gradient buffer of a node, zero-initialized on first access.
  Tensor<T>& grad(NodeId id);
  bool has_grad(NodeId id) const { return !nodes_.at(id.index).grad.empty() || nodes_.at(id.index).value.empty(); }
  const std::vector<NodeId>& inputs(NodeId id) const { return nodes_.at(id.index).inputs; }

  /// Seeds d(loss)/d(loss) = 1 for a single-element node and sweeps backward.
  void backward(NodeId loss);

  /// Gradients of all parameter nodes; unreached parameters get zeros.
  std::map<std::string, Tensor<T>> parameter_gradients() const;
  std::optional<NodeId> find_parameter(const std::string& name) const;
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    std::vector<NodeId> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  std::map<std::string, NodeId> parameters_;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace eegssl
