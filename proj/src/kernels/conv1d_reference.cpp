#include "eegssl/kernels/conv1d.hpp"

#include <cstdint>

namespace eegssl::kernels::reference {

namespace {
// Input index for output position t and tap k, or -1 inside the padding.
std::int64_t source(const Conv1dGeometry& g, std::size_t t, std::size_t k) {
  const auto i = static_cast<std::int64_t>(t * g.stride + k) - static_cast<std::int64_t>(g.pad_left());
  return (i < 0 || i >= static_cast<std::int64_t>(g.in_length)) ? -1 : i;
}
}  // namespace

template <typename T>
void conv1d_forward(const Conv1dGeometry& g, const T* input, const T* weight, const T* bias, T* output) {
  const std::size_t lo = g.out_length();
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
      for (std::size_t t = 0; t < lo; ++t) {
        T acc = bias ? bias[oc] : T(0);
        for (std::size_t ic = 0; ic < g.in_channels; ++ic) {
          for (std::size_t k = 0; k < g.kernel; ++k) {
            const auto i = source(g, t, k);
            if (i < 0) continue;
            acc += weight[(oc * g.in_channels + ic) * g.kernel + k] *
                   input[(b * g.in_channels + ic) * g.in_length + static_cast<std::size_t>(i)];
          }
        }
        output[(b * g.out_channels + oc) * lo + t] = acc;
      }
    }
  }
}

template <typename T>
void conv1d_backward_input(const Conv1dGeometry& g, const T* grad_output, const T* weight, T* grad_input) {
  const std::size_t lo = g.out_length();
  for (std::size_t i = 0; i < g.batch * g.in_channels * g.in_length; ++i) grad_input[i] = T(0);
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
      for (std::size_t t = 0; t < lo; ++t) {
        const T go = grad_output[(b * g.out_channels + oc) * lo + t];
        for (std::size_t ic = 0; ic < g.in_channels; ++ic) {
          for (std::size_t k = 0; k < g.kernel; ++k) {
            const auto i = source(g, t, k);
            if (i < 0) continue;
            grad_input[(b * g.in_channels + ic) * g.in_length + static_cast<std::size_t>(i)] +=
                go * weight[(oc * g.in_channels + ic) * g.kernel + k];
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
  for (std::size_t i = 0; i < g.out_channels * g.in_channels * g.kernel; ++i) grad_weight[i] = T(0);
  for (std::size_t oc = 0; oc < g.out_channels; ++oc) grad_bias[oc] = T(0);
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
      for (std::size_t t = 0; t < lo; ++t) {
        const T go = grad_output[(b * g.out_channels + oc) * lo + t];
        grad_bias[oc] += go;
        for (std::size_t ic = 0; ic < g.in_channels; ++ic) {
          for (std::size_t k = 0; k < g.kernel; ++k) {
            const auto i = source(g, t, k);
            if (i < 0) continue;
            grad_weight[(oc * g.in_channels + ic) * g.kernel + k] +=
                go * input[(b * g.in_channels + ic) * g.in_length + static_cast<std::size_t>(i)];
          }
        }
      }
    }
  }
}

#define EEGSSL_INSTANTIATE(T)                                                                        \
  template void conv1d_forward<T>(const Conv1dGeometry&, const T*, const T*, const T*, T*);          \
  template void conv1d_backward_input<T>(const Conv1dGeometry&, const T*, const T*, T*);             \
  template void conv1d_backward_params<T>(const Conv1dGeometry&, const T*, const T*, T*, T*);
EEGSSL_INSTANTIATE(float)
EEGSSL_INSTANTIATE(double)
#undef EEGSSL_INSTANTIATE

}  // namespace eegssl::kernels::reference
