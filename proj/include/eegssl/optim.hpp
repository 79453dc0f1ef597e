#pragma once

#include <map>
#include <string>

#include "eegssl/model.hpp"

namespace eegssl {

struct SgdOptions {
  double momentum = 0.9;
  double l2 = 1e-4;
};

/// v <- momentum * v + (grad + l2 * param); param <- param - lr * v.
template <typename T>
void sgd_momentum_step(Tensor<T>& param, const Tensor<T>& grad, Tensor<T>& velocity, double lr,
                       const SgdOptions& opts = {});

/// Velocity buffers keyed by parameter name, created on first use.
template <typename T>
class SgdMomentum {
 public:
  explicit SgdMomentum(SgdOptions opts = {}) : opts_(opts) {}

  /// Updates every parameter that has an entry in `grads`.
  void step(Parameters<T>& params, const std::map<std::string, Tensor<T>>& grads, double lr);

  const std::map<std::string, Tensor<T>>& velocity() const noexcept { return velocity_; }

 private:
  SgdOptions opts_;
  std::map<std::string, Tensor<T>> velocity_;
};

/// Linear warmup 0 -> base over [0, warmup], cosine decay to 0 at `total`.
/// `epoch` may be fractional.
double lr_schedule(double epoch, double total_epochs, double base_lr, double warmup_epochs);

}  // namespace eegssl
