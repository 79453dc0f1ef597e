#include <algorithm>
#include <array>
#include <cstdint>

#include "eegssl/kernels/conv1d.hpp"

namespace eegssl::kernels::omp {

namespace {

struct TapRange {
  std::size_t begin;
  std::size_t end;
};

// Output positions t whose tap k lands inside the unpadded input.
TapRange valid_outputs(const Conv1dGeometry& g, std::size_t k) {
  const std::size_t pl = g.pad_left();
  const std::size_t lo = g.out_length();
  std::size_t begin = 0;
  if (k < pl) begin = (pl - k + g.stride - 1) / g.stride;
  if (g.in_length - 1 + pl < k) return {0, 0};
  const std::size_t end = std::min(lo, (g.in_length - 1 + pl - k) / g.stride + 1);
  return {std::min(begin, end), end};
}

// Fixed-order dot product with eight independent lanes.
template <typename T>
T dot(const T* a, const T* b, std::size_t n) {
  std::array<T, 8> lanes{};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t j = 0; j < 8; ++j) lanes[j] += a[i + j] * b[i + j];
  }
  T tail = T(0);
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) + ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7])) + tail;
}

template <typename T>
T strided_dot(const T* a, const T* b, std::size_t stride, std::size_t n) {
  T acc = T(0);
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i * stride];
  return acc;
}

}  // namespace

template <typename T>
void conv1d_forward(const Conv1dGeometry& g, const T* input, const T* weight, const T* bias, T* output) {
  const std::size_t lo = g.out_length();
  const std::size_t pl = g.pad_left();
  const auto batch = static_cast<std::int64_t>(g.batch);
  const auto out_channels = static_cast<std::int64_t>(g.out_channels);
#pragma omp parallel for collapse(2) schedule(static)
  for (std::int64_t b = 0; b < batch; ++b) {
    for (std::int64_t oc = 0; oc < out_channels; ++oc) {
      T* out = output + (static_cast<std::size_t>(b) * g.out_channels + static_cast<std::size_t>(oc)) * lo;
      std::fill(out, out + lo, bias ? bias[oc] : T(0));
      for (std::size_t ic = 0; ic < g.in_channels; ++ic) {
        const T* in = input + (static_cast<std::size_t>(b) * g.in_channels + ic) * g.in_length;
        const T* w = weight + (static_cast<std::size_t>(oc) * g.in_channels + ic) * g.kernel;
        for (std::size_t k = 0; k < g.kernel; ++k) {
          const auto [t0, t1] = valid_outputs(g, k);
          const T wk = w[k];
          if (g.stride == 1) {
            const T* src = in + (t0 + k - pl);
            T* dst = out + t0;
            const std::size_t n = t1 - t0;
            for (std::size_t t = 0; t < n; ++t) dst[t] += wk * src[t];
          } else {
            for (std::size_t t = t0; t < t1; ++t) out[t] += wk * in[t * g.stride + k - pl];
          }
        }
      }
    }
  }
}

template <typename T>
void conv1d_backward_input(const Conv1dGeometry& g, const T* grad_output, const T* weight, T* grad_input) {
  const std::size_t lo = g.out_length();
  const std::size_t pl = g.pad_left();
  const auto batch = static_cast<std::int64_t>(g.batch);
  const auto in_channels = static_cast<std::int64_t>(g.in_channels);
#pragma omp parallel for collapse(2) schedule(static)
  for (std::int64_t b = 0; b < batch; ++b) {
    for (std::int64_t ic = 0; ic < in_channels; ++ic) {
      T* din = grad_input + (static_cast<std::size_t>(b) * g.in_channels + static_cast<std::size_t>(ic)) * g.in_length;
      std::fill(din, din + g.in_length, T(0));
      for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
        const T* dout = grad_output + (static_cast<std::size_t>(b) * g.out_channels + oc) * lo;
        const T* w = weight + (oc * g.in_channels + static_cast<std::size_t>(ic)) * g.kernel;
        for (std::size_t k = 0; k < g.kernel; ++k) {
          const auto [t0, t1] = valid_outputs(g, k);
          const T wk = w[k];
          if (g.stride == 1) {
            T* dst = din + (t0 + k - pl);
            const T* src = dout + t0;
            const std::size_t n = t1 - t0;
            for (std::size_t t = 0; t < n; ++t) dst[t] += wk * src[t];
          } else {
            for (std::size_t t = t0; t < t1; ++t) din[t * g.stride + k - pl] += wk * dout[t];
          }
        }
      }
    }
  }
}

template <typename T>
void conv1d_backward_params(const Conv1dGeometry& g, const T* input, const T* grad_output, T* grad_weight,
                            T* grad_bias) {
  const std::size_t lo = g.out_length();
  const std::size_t pl = g.pad_left();
  const auto out_channels = static_cast<std::int64_t>(g.out_channels);
  const auto in_channels = static_cast<std::int64_t>(g.in_channels);
#pragma omp parallel for collapse(2) schedule(static)
  for (std::int64_t oc = 0; oc < out_channels; ++oc) {
    for (std::int64_t ic = 0; ic < in_channels; ++ic) {
      T* dw = grad_weight + (static_cast<std::size_t>(oc) * g.in_channels + static_cast<std::size_t>(ic)) * g.kernel;
      for (std::size_t k = 0; k < g.kernel; ++k) {
        const auto [t0, t1] = valid_outputs(g, k);
        T acc = T(0);
        for (std::size_t b = 0; b < g.batch; ++b) {
          const T* dout = grad_output + (b * g.out_channels + static_cast<std::size_t>(oc)) * lo;
          const T* in = input + (b * g.in_channels + static_cast<std::size_t>(ic)) * g.in_length;
          if (g.stride == 1) {
            acc += dot(dout + t0, in + (t0 + k - pl), t1 - t0);
          } else {
            acc += strided_dot(dout + t0, in + (t0 * g.stride + k - pl), g.stride, t1 - t0);
          }
        }
        dw[k] = acc;
      }
    }
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t oc = 0; oc < out_channels; ++oc) {
    T acc = T(0);
    for (std::size_t b = 0; b < g.batch; ++b) {
      const T* dout = grad_output + (b * g.out_channels + static_cast<std::size_t>(oc)) * lo;
      for (std::size_t t = 0; t < lo; ++t) acc += dout[t];
    }
    grad_bias[oc] = acc;
  }
}

#define EEGSSL_INSTANTIATE(T)                                                                        \
  template void conv1d_forward<T>(const Conv1dGeometry&, const T*, const T*, const T*, T*);          \
  template void conv1d_backward_input<T>(const Conv1dGeometry&, const T*, const T*, T*);             \
  template void conv1d_backward_params<T>(const Conv1dGeometry&, const T*, const T*, T*, T*);
EEGSSL_INSTANTIATE(float)
EEGSSL_INSTANTIATE(double)
#undef EEGSSL_INSTANTIATE

}  // namespace eegssl::kernels::omp
