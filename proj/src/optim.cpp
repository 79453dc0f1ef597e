#include "eegssl/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eegssl {

template <typename T>
void sgd_momentum_step(Tensor<T>& param, const Tensor<T>& grad, Tensor<T>& velocity, double lr,
                       const SgdOptions& opts) {
  require_shape(grad.shape(), param.shape(), "sgd gradient");
  require_shape(velocity.shape(), param.shape(), "sgd velocity");
  T* p = param.data();
  const T* g = grad.data();
  T* v = velocity.data();
  const T m = static_cast<T>(opts.momentum);
  const T l2 = static_cast<T>(opts.l2);
  const T step = static_cast<T>(lr);
  for (std::size_t i = 0; i < param.size(); ++i) {
    v[i] = m * v[i] + (g[i] + l2 * p[i]);
    p[i] -= step * v[i];
  }
}

template <typename T>
void SgdMomentum<T>::step(Parameters<T>& params, const std::map<std::string, Tensor<T>>& grads, double lr) {
  for (const auto& [name, grad] : grads) {
    if (!Parameters<T>::is_trainable(name)) continue;
    auto& param = params.at(name);
    auto it = velocity_.find(name);
    if (it == velocity_.end()) it = velocity_.emplace(name, Tensor<T>(param.shape())).first;
    sgd_momentum_step(param, grad, it->second, lr, opts_);
  }
}

double lr_schedule(double epoch, double total_epochs, double base_lr, double warmup_epochs) {
  if (!(total_epochs > 0.0) || warmup_epochs < 0.0 || warmup_epochs > total_epochs) {
    fail(ErrorCode::InvalidSpec, "lr_schedule needs 0 <= warmup <= total and total > 0");
  }
  if (epoch <= 0.0 && warmup_epochs > 0.0) return 0.0;
  if (epoch < warmup_epochs) return base_lr * epoch / warmup_epochs;
  if (epoch >= total_epochs) return 0.0;
  if (total_epochs == warmup_epochs) return base_lr;
  const double progress = (epoch - warmup_epochs) / (total_epochs - warmup_epochs);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

template void sgd_momentum_step<float>(Tensor<float>&, const Tensor<float>&, Tensor<float>&, double,
                                       const SgdOptions&);
template void sgd_momentum_step<double>(Tensor<double>&, const Tensor<double>&, Tensor<double>&, double,
                                        const SgdOptions&);
template class SgdMomentum<float>;
template class SgdMomentum<double>;

}  // namespace eegssl
