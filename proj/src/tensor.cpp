#include "eegssl/tensor.hpp"

namespace eegssl {

std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require_shape(const Shape& actual, const Shape& expected, const std::string& what) {
  if (actual != expected) {
    fail(ErrorCode::ShapeMismatch, what + ": expected " + shape_string(expected) + ", got " + shape_string(actual));
  }
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace eegssl
