#include "eegssl/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "eegssl/kernels/conv1d.hpp"

namespace eegssl {

template <typename T>
NodeId conv1d(Graph<T>& g, NodeId x, NodeId w, NodeId b, std::size_t stride) {
  const auto& xv = g.value(x);
  const auto& wv = g.value(w);
  if (xv.rank() != 3 || wv.rank() != 3 || wv.dim(1) != xv.dim(1) || stride < 1) {
    fail(ErrorCode::ShapeMismatch, "conv1d input " + shape_string(xv.shape()) + " vs kernel " +
                                       shape_string(wv.shape()));
  }
  require_shape(g.value(b).shape(), {wv.dim(0)}, "conv1d bias");
  kernels::Conv1dGeometry geo{xv.dim(0), xv.dim(1), wv.dim(0), xv.dim(2), wv.dim(2), stride};
  if (geo.kernel > geo.in_length + geo.pad_total()) {
    fail(ErrorCode::ShapeMismatch, "conv1d kernel longer than padded input");
  }
  Tensor<T> out({geo.batch, geo.out_channels, geo.out_length()});
  kernels::omp::conv1d_forward(geo, xv.data(), wv.data(), g.value(b).data(), out.data());
  return g.record(std::move(out), {x, w, b}, [geo](Graph<T>& gr, NodeId self) {
    const auto& in = gr.inputs(self);
    const auto& dy = gr.grad(self);
    if (gr.requires_grad(in[0])) {
      Tensor<T> dx(gr.value(in[0]).shape());
      kernels::omp::conv1d_backward_input(geo, dy.data(), gr.value(in[1]).data(), dx.data());
      auto& acc = gr.grad(in[0]);
      for (std::size_t i = 0; i < dx.size(); ++i) acc[i] += dx[i];
    }
    if (gr.requires_grad(in[1]) || gr.requires_grad(in[2])) {
      Tensor<T> dw(gr.value(in[1]).shape());
      Tensor<T> db(gr.value(in[2]).shape());
      kernels::omp::conv1d_backward_params(geo, gr.value(in[0]).data(), dy.data(), dw.data(), db.data());
      auto& aw = gr.grad(in[1]);
      for (std::size_t i = 0; i < dw.size(); ++i) aw[i] += dw[i];
      auto& ab = gr.grad(in[2]);
      for (std::size_t i = 0; i < db.size(); ++i) ab[i] += db[i];
    }
  });
}

template <typename T>
NodeId relu(Graph<T>& g, NodeId x) {
  Tensor<T> out = g.value(x);
  for (auto& v : out.values()) v = v > T(0) ? v : T(0);
  return g.record(std::move(out), {x}, [](Graph<T>& gr, NodeId self) {
    const auto in = gr.inputs(self)[0];
    const auto& xv = gr.value(in);
    const auto& dy = gr.grad(self);
    auto& dx = gr.grad(in);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += xv[i] > T(0) ? dy[i] : T(0);
  });
}

template <typename T>
NodeId add(Graph<T>& g, NodeId a, NodeId b) {
  require_shape(g.value(b).shape(), g.value(a).shape(), "add");
  Tensor<T> out = g.value(a);
  const auto& bv = g.value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return g.record(std::move(out), {a, b}, [](Graph<T>& gr, NodeId self) {
    for (auto in : gr.inputs(self)) {
      if (!gr.requires_grad(in)) continue;
      const auto& dy = gr.grad(self);
      auto& dx = gr.grad(in);
      for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i];
    }
  });
}

template <typename T>
NodeId dense(Graph<T>& g, NodeId x, NodeId w, NodeId b) {
  const auto& xv = g.value(x);
  const auto& wv = g.value(w);
  if (xv.rank() != 2 || wv.rank() != 2 || wv.dim(1) != xv.dim(1)) {
    fail(ErrorCode::ShapeMismatch, "dense input " + shape_string(xv.shape()) + " vs weight " +
                                       shape_string(wv.shape()));
  }
  const std::size_t batch = xv.dim(0), in_f = xv.dim(1), out_f = wv.dim(0);
  require_shape(g.value(b).shape(), {out_f}, "dense bias");
  Tensor<T> out({batch, out_f});
  const auto& bv = g.value(b);
  for (std::size_t n = 0; n < batch; ++n) {
    const T* xr = xv.data() + n * in_f;
    for (std::size_t o = 0; o < out_f; ++o) {
      const T* wr = wv.data() + o * in_f;
      T acc = bv[o];
      for (std::size_t i = 0; i < in_f; ++i) acc += wr[i] * xr[i];
      out[n * out_f + o] = acc;
    }
  }
  return g.record(std::move(out), {x, w, b}, [batch, in_f, out_f](Graph<T>& gr, NodeId self) {
    const auto& in = gr.inputs(self);
    const auto& dy = gr.grad(self);
    const auto& xv2 = gr.value(in[0]);
    const auto& wv2 = gr.value(in[1]);
    if (gr.requires_grad(in[0])) {
      auto& dx = gr.grad(in[0]);
      for (std::size_t n = 0; n < batch; ++n) {
        for (std::size_t o = 0; o < out_f; ++o) {
          const T d = dy[n * out_f + o];
          const T* wr = wv2.data() + o * in_f;
          T* dxr = dx.data() + n * in_f;
          for (std::size_t i = 0; i < in_f; ++i) dxr[i] += d * wr[i];
        }
      }
    }
    if (gr.requires_grad(in[1])) {
      auto& dw = gr.grad(in[1]);
      for (std::size_t n = 0; n < batch; ++n) {
        const T* xr = xv2.data() + n * in_f;
        for (std::size_t o = 0; o < out_f; ++o) {
          const T d = dy[n * out_f + o];
          T* dwr = dw.data() + o * in_f;
          for (std::size_t i = 0; i < in_f; ++i) dwr[i] += d * xr[i];
        }
      }
    }
    if (gr.requires_grad(in[2])) {
      auto& db = gr.grad(in[2]);
      for (std::size_t n = 0; n < batch; ++n) {
        for (std::size_t o = 0; o < out_f; ++o) db[o] += dy[n * out_f + o];
      }
    }
  });
}

template <typename T>
NodeId batch_norm(Graph<T>& g, NodeId x, NodeId scale, NodeId shift, BatchNormState<T> state, Mode mode) {
  const auto& xv = g.value(x);
  if (xv.rank() != 2 && xv.rank() != 3) fail(ErrorCode::ShapeMismatch, "batch_norm needs rank 2 or 3 input");
  const std::size_t batch = xv.dim(0), channels = xv.dim(1), len = xv.rank() == 3 ? xv.dim(2) : 1;
  require_shape(g.value(scale).shape(), {channels}, "batch_norm scale");
  require_shape(g.value(shift).shape(), {channels}, "batch_norm shift");
  if (!state.running_mean || !state.running_var) fail(ErrorCode::ShapeMismatch, "batch_norm needs running stats");
  require_shape(state.running_mean->shape(), {channels}, "batch_norm running mean");
  require_shape(state.running_var->shape(), {channels}, "batch_norm running var");
  const std::size_t count = batch * len;
  if (mode == Mode::Train && count < 2) fail(ErrorCode::ShapeMismatch, "batch_norm train mode needs >1 value per channel");

  std::vector<T> mean(channels), inv_std(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    if (mode == Mode::Train) {
      double s = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const T* row = xv.data() + (n * channels + c) * len;
        for (std::size_t t = 0; t < len; ++t) s += row[t];
      }
      const double m = s / static_cast<double>(count);
      double ss = 0.0;
      for (std::size_t n = 0; n < batch; ++n) {
        const T* row = xv.data() + (n * channels + c) * len;
        for (std::size_t t = 0; t < len; ++t) ss += (row[t] - m) * (row[t] - m);
      }
      const double var = ss / static_cast<double>(count);
      mean[c] = static_cast<T>(m);
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + state.eps));
      auto& rm = (*state.running_mean)[c];
      auto& rv = (*state.running_var)[c];
      rm = static_cast<T>((1.0 - state.momentum) * rm + state.momentum * m);
      rv = static_cast<T>((1.0 - state.momentum) * rv +
                          state.momentum * var * static_cast<double>(count) / static_cast<double>(count - 1));
    } else {
      mean[c] = (*state.running_mean)[c];
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(static_cast<double>((*state.running_var)[c]) + state.eps));
    }
  }

  Tensor<T> xhat(xv.shape());
  Tensor<T> out(xv.shape());
  const auto& sc = g.value(scale);
  const auto& sh = g.value(shift);
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t off = (n * channels + c) * len;
      for (std::size_t t = 0; t < len; ++t) {
        const T h = (xv[off + t] - mean[c]) * inv_std[c];
        xhat[off + t] = h;
        out[off + t] = sc[c] * h + sh[c];
      }
    }
  }
  const bool train = mode == Mode::Train;
  return g.record(std::move(out), {x, scale, shift},
                  [xhat = std::move(xhat), inv_std, batch, channels, len, train](Graph<T>& gr, NodeId self) {
    const auto& in = gr.inputs(self);
    const auto& dy = gr.grad(self);
    const auto& sc2 = gr.value(in[1]);
    std::vector<double> sum_dy(channels, 0.0), sum_dy_xhat(channels, 0.0);
    for (std::size_t n = 0; n < batch; ++n) {
      for (std::size_t c = 0; c < channels; ++c) {
        const std::size_t off = (n * channels + c) * len;
        for (std::size_t t = 0; t < len; ++t) {
          sum_dy[c] += dy[off + t];
          sum_dy_xhat[c] += dy[off + t] * xhat[off + t];
        }
      }
    }
    if (gr.requires_grad(in[1])) {
      auto& ds = gr.grad(in[1]);
      for (std::size_t c = 0; c < channels; ++c) ds[c] += static_cast<T>(sum_dy_xhat[c]);
    }
    if (gr.requires_grad(in[2])) {
      auto& db = gr.grad(in[2]);
      for (std::size_t c = 0; c < channels; ++c) db[c] += static_cast<T>(sum_dy[c]);
    }
    if (!gr.requires_grad(in[0])) return;
    auto& dx = gr.grad(in[0]);
    const double m = static_cast<double>(batch * len);
    for (std::size_t n = 0; n < batch; ++n) {
      for (std::size_t c = 0; c < channels; ++c) {
        const std::size_t off = (n * channels + c) * len;
        const T k = sc2[c] * inv_std[c];
        if (train) {
          const T mean_dy = static_cast<T>(sum_dy[c] / m);
          const T mean_dyx = static_cast<T>(sum_dy_xhat[c] / m);
          for (std::size_t t = 0; t < len; ++t) {
            dx[off + t] += k * (dy[off + t] - mean_dy - xhat[off + t] * mean_dyx);
          }
        } else {
          for (std::size_t t = 0; t < len; ++t) dx[off + t] += k * dy[off + t];
        }
      }
    }
  });
}

template <typename T>
NodeId dropout(Graph<T>& g, NodeId x, double rate, RngStream* rng, Mode mode) {
  if (rate < 0.0 || rate >= 1.0) fail(ErrorCode::InvalidSpec, "dropout rate must be in [0, 1)");
  if (mode == Mode::Eval || rate == 0.0) return x;
  if (!rng) fail(ErrorCode::InvalidSpec, "train-mode dropout needs a random stream");
  const auto& xv = g.value(x);
  std::vector<T> mask(xv.size());
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  for (auto& m : mask) m = rng->uniform() < rate ? T(0) : keep_scale;
  Tensor<T> out(xv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * mask[i];
  return g.record(std::move(out), {x}, [mask = std::move(mask)](Graph<T>& gr, NodeId self) {
    const auto in = gr.inputs(self)[0];
    const auto& dy = gr.grad(self);
    auto& dx = gr.grad(in);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * mask[i];
  });
}

template <typename T>
NodeId global_avg_pool(Graph<T>& g, NodeId x) {
  const auto& xv = g.value(x);
  if (xv.rank() != 3) fail(ErrorCode::ShapeMismatch, "global_avg_pool needs (B, C, L)");
  const std::size_t batch = xv.dim(0), channels = xv.dim(1), len = xv.dim(2);
  Tensor<T> out({batch, channels});
  for (std::size_t i = 0; i < batch * channels; ++i) {
    T acc = T(0);
    for (std::size_t t = 0; t < len; ++t) acc += xv[i * len + t];
    out[i] = acc / static_cast<T>(len);
  }
  return g.record(std::move(out), {x}, [batch, channels, len](Graph<T>& gr, NodeId self) {
    const auto in = gr.inputs(self)[0];
    const auto& dy = gr.grad(self);
    auto& dx = gr.grad(in);
    for (std::size_t i = 0; i < batch * channels; ++i) {
      const T d = dy[i] / static_cast<T>(len);
      for (std::size_t t = 0; t < len; ++t) dx[i * len + t] += d;
    }
  });
}

template <typename T>
NodeId shortcut(Graph<T>& g, NodeId x, std::size_t out_channels, std::size_t stride) {
  const auto& xv = g.value(x);
  if (xv.rank() != 3 || out_channels < xv.dim(1) || stride < 1) {
    fail(ErrorCode::ShapeMismatch, "shortcut cannot reduce channels");
  }
  const std::size_t batch = xv.dim(0), cin = xv.dim(1), len = xv.dim(2);
  if (stride == 1 && out_channels == cin) return x;
  const std::size_t lo = (len + stride - 1) / stride;
  Tensor<T> out({batch, out_channels, lo});
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t c = 0; c < cin; ++c) {
      for (std::size_t t = 0; t < lo; ++t) out[(n * out_channels + c) * lo + t] = xv[(n * cin + c) * len + t * stride];
    }
  }
  return g.record(std::move(out), {x}, [batch, cin, len, lo, out_channels, stride](Graph<T>& gr, NodeId self) {
    const auto in = gr.inputs(self)[0];
    const auto& dy = gr.grad(self);
    auto& dx = gr.grad(in);
    for (std::size_t n = 0; n < batch; ++n) {
      for (std::size_t c = 0; c < cin; ++c) {
        for (std::size_t t = 0; t < lo; ++t) dx[(n * cin + c) * len + t * stride] += dy[(n * out_channels + c) * lo + t];
      }
    }
  });
}

template <typename T>
NodeId weighted_sum(Graph<T>& g, NodeId x, const Tensor<T>& weights) {
  require_shape(weights.shape(), g.value(x).shape(), "weighted_sum");
  const auto& xv = g.value(x);
  T acc = T(0);
  for (std::size_t i = 0; i < xv.size(); ++i) acc += xv[i] * weights[i];
  return g.record(Tensor<T>({1}, std::vector<T>{acc}), {x}, [weights](Graph<T>& gr, NodeId self) {
    const auto in = gr.inputs(self)[0];
    const T d = gr.grad(self)[0];
    auto& dx = gr.grad(in);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += d * weights[i];
  });
}

template <typename T>
CrossEntropy<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    fail(ErrorCode::ShapeMismatch, "logits " + shape_string(logits.shape()) + " vs " +
                                       std::to_string(labels.size()) + " labels");
  }
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (batch == 0) fail(ErrorCode::EmptyInput, "cross entropy of an empty batch");
  CrossEntropy<T> out;
  out.probabilities = Tensor<T>(logits.shape());
  double total = 0.0;
  for (std::size_t n = 0; n < batch; ++n) {
    if (labels[n] < 0 || static_cast<std::size_t>(labels[n]) >= classes) {
      fail(ErrorCode::IndexOutOfRange, "label " + std::to_string(labels[n]) + " out of range");
    }
    const T* row = logits.data() + n * classes;
    double mx = row[0];
    for (std::size_t c = 1; c < classes; ++c) mx = std::max(mx, static_cast<double>(row[c]));
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(row[c] - mx);
    const double log_z = mx + std::log(z);
    for (std::size_t c = 0; c < classes; ++c) out.probabilities[n * classes + c] = static_cast<T>(std::exp(row[c] - log_z));
    total += log_z - row[labels[n]];
  }
  out.loss = total / static_cast<double>(batch);
  return out;
}

template <typename T>
CrossEntropyNode<T> softmax_cross_entropy(Graph<T>& g, NodeId logits, std::span<const int> labels) {
  auto ce = softmax_cross_entropy(g.value(logits), labels);
  std::vector<int> lab(labels.begin(), labels.end());
  const auto loss = g.record(Tensor<T>({1}, std::vector<T>{static_cast<T>(ce.loss)}), {logits},
                             [probs = ce.probabilities, lab = std::move(lab)](Graph<T>& gr, NodeId self) {
    const auto in = gr.inputs(self)[0];
    const T d = gr.grad(self)[0];
    auto& dx = gr.grad(in);
    const std::size_t batch = probs.dim(0), classes = probs.dim(1);
    const T scale = d / static_cast<T>(batch);
    for (std::size_t n = 0; n < batch; ++n) {
      for (std::size_t c = 0; c < classes; ++c) {
        const T target = static_cast<int>(c) == lab[n] ? T(1) : T(0);
        dx[n * classes + c] += scale * (probs[n * classes + c] - target);
      }
    }
  });
  return {loss, std::move(ce.probabilities)};
}

template <typename T>
NodeId contrastive_loss(Graph<T>& g, NodeId embeddings, double temperature, LossMode mode) {
  const auto& ev = g.value(embeddings);
  if (ev.rank() != 2) fail(ErrorCode::ShapeMismatch, "contrastive loss needs (2N, D) embeddings");
  EmbeddingBatch batch(ev.dim(0), ev.dim(1), std::vector<double>(ev.values().begin(), ev.values().end()));
  auto result = batch_loss_with_grad(batch, temperature, mode);
  if (!std::isfinite(result.value.loss)) fail(ErrorCode::NonFinite, "contrastive loss is not finite");
  std::vector<T> grad(result.grad.begin(), result.grad.end());
  return g.record(Tensor<T>({1}, std::vector<T>{static_cast<T>(result.value.loss)}), {embeddings},
                  [grad = std::move(grad)](Graph<T>& gr, NodeId self) {
    const auto in = gr.inputs(self)[0];
    const T d = gr.grad(self)[0];
    auto& dx = gr.grad(in);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += d * grad[i];
  });
}

#define EEGSSL_INSTANTIATE(T)                                                                              \
  template NodeId conv1d<T>(Graph<T>&, NodeId, NodeId, NodeId, std::size_t);                               \
  template NodeId relu<T>(Graph<T>&, NodeId);                                                              \
  template NodeId add<T>(Graph<T>&, NodeId, NodeId);                                                       \
  template NodeId dense<T>(Graph<T>&, NodeId, NodeId, NodeId);                                             \
  template NodeId batch_norm<T>(Graph<T>&, NodeId, NodeId, NodeId, BatchNormState<T>, Mode);               \
  template NodeId dropout<T>(Graph<T>&, NodeId, double, RngStream*, Mode);                                 \
  template NodeId global_avg_pool<T>(Graph<T>&, NodeId);                                                   \
  template NodeId shortcut<T>(Graph<T>&, NodeId, std::size_t, std::size_t);                                \
  template NodeId weighted_sum<T>(Graph<T>&, NodeId, const Tensor<T>&);                                    \
  template CrossEntropy<T> softmax_cross_entropy<T>(const Tensor<T>&, std::span<const int>);               \
  template CrossEntropyNode<T> softmax_cross_entropy<T>(Graph<T>&, NodeId, std::span<const int>);          \
  template NodeId contrastive_loss<T>(Graph<T>&, NodeId, double, LossMode);
EEGSSL_INSTANTIATE(float)
EEGSSL_INSTANTIATE(double)
#undef EEGSSL_INSTANTIATE

}  // namespace eegssl
