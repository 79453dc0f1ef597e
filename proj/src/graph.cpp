#include "eegssl/graph.hpp"

namespace eegssl {

template <typename T>
NodeId Graph<T>::constant(Tensor<T> value) {
  nodes_.push_back(Node{std::move(value), {}, {}, {}, false});
  return NodeId{nodes_.size() - 1};
}

template <typename T>
NodeId Graph<T>::parameter(const std::string& name, const Tensor<T>& value) {
  if (auto it = parameters_.find(name); it != parameters_.end()) return it->second;
  nodes_.push_back(Node{value, {}, {}, {}, true});
  const NodeId id{nodes_.size() - 1};
  parameters_.emplace(name, id);
  return id;
}

template <typename T>
NodeId Graph<T>::record(Tensor<T> value, std::vector<NodeId> inputs, BackwardFn backward) {
  bool needs_grad = false;
  for (auto in : inputs) {
    if (in.index >= nodes_.size()) {
      fail(ErrorCode::GraphCycle, "node input " + std::to_string(in.index) + " does not precede node " +
                                      std::to_string(nodes_.size()));
    }
    needs_grad = needs_grad || nodes_[in.index].requires_grad;
  }
  Node node{std::move(value), {}, std::move(inputs), {}, needs_grad};
  if (needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return NodeId{nodes_.size() - 1};
}

template <typename T>
Tensor<T>& Graph<T>::grad(NodeId id) {
  auto& node = nodes_.at(id.index);
  if (node.grad.shape() != node.value.shape()) node.grad = Tensor<T>(node.value.shape());
  return node.grad;
}

template <typename T>
void Graph<T>::backward(NodeId loss) {
  auto& root = nodes_.at(loss.index);
  if (root.value.size() != 1) fail(ErrorCode::ShapeMismatch, "backward needs a scalar loss");
  grad(loss).fill(T(1));
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    auto& node = nodes_[i];
    if (!node.requires_grad || !node.backward || node.grad.empty()) continue;
    node.backward(*this, NodeId{i});
  }
}

template <typename T>
std::map<std::string, Tensor<T>> Graph<T>::parameter_gradients() const {
  std::map<std::string, Tensor<T>> out;
  for (const auto& [name, id] : parameters_) {
    const auto& node = nodes_[id.index];
    out.emplace(name, node.grad.empty() ? Tensor<T>(node.value.shape()) : node.grad);
  }
  return out;
}

template <typename T>
std::optional<NodeId> Graph<T>::find_parameter(const std::string& name) const {
  if (auto it = parameters_.find(name); it != parameters_.end()) return it->second;
  return std::nullopt;
}

template class Graph<float>;
template class Graph<double>;

}  // namespace eegssl
