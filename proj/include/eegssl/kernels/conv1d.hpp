#pragma once

#include <cstddef>

namespace eegssl::kernels {

/// Cross-correlation geometry with "same" padding: output length is
/// ceil(in_length / stride) and the padding is split with the extra sample
/// on the right.
struct Conv1dGeometry {
  std::size_t batch = 1;
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t in_length = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;

  std::size_t out_length() const { return (in_length + stride - 1) / stride; }
  std::size_t pad_total() const {
    const std::size_t span = (out_length() - 1) * stride + kernel;
    return span > in_length ? span - in_length : 0;
  }
  std::size_t pad_left() const { return pad_total() / 2; }
};

// Layouts: input (batch, in_channels, in_length); weight (out_channels,
// in_channels, kernel); bias (out_channels); output (batch, out_channels,
// out_length). Backward kernels overwrite their outputs.

/// Straightforward loops; the oracle the parallel kernels are tested against.
namespace reference {
template <typename T>
void conv1d_forward(const Conv1dGeometry& g, const T* input, const T* weight, const T* bias, T* output);
template <typename T>
void conv1d_backward_input(const Conv1dGeometry& g, const T* grad_output, const T* weight, T* grad_input);
template <typename T>
void conv1d_backward_params(const Conv1dGeometry& g, const T* input, const T* grad_output, T* grad_weight,
                            T* grad_bias);
}  // namespace reference

/// OpenMP kernels. Every output element is reduced by a single thread in a
/// fixed order, so results are bitwise independent of the thread count.
namespace omp {
template <typename T>
void conv1d_forward(const Conv1dGeometry& g, const T* input, const T* weight, const T* bias, T* output);
template <typename T>
void conv1d_backward_input(const Conv1dGeometry& g, const T* grad_output, const T* weight, T* grad_input);
template <typename T>
void conv1d_backward_params(const Conv1dGeometry& g, const T* input, const T* grad_output, T* grad_weight,
                            T* grad_bias);
}  // namespace omp

}  // namespace eegssl::kernels
