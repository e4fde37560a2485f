#pragma once

#include <cmath>
#include <vector>

#include "tactile_rom/core/error.hpp"

namespace trom::train {

struct AdamParams {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment buffers for one parameter tensor. Bias correction uses the caller's
// global step count so several tensors can share one schedule.
template <typename T>
struct AdamState {
  std::vector<T> m, v;

  void init(std::size_t n) {
    m.assign(n, T(0));
    v.assign(n, T(0));
  }
};

// Standard bias-corrected update. Returns false (and leaves params and
// moments untouched) if any gradient entry is non-finite. `step` is 1-based.
template <typename T>
bool adam_step(std::vector<T>& params, const std::vector<T>& grads, AdamState<T>& state,
               long long step, const AdamParams& hp) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size())
    throw ShapeError("adam_step: tensor size mismatch");
  if (step < 1) throw ShapeError("adam_step: step count must be >= 1");
  for (const T& g : grads)
    if (!std::isfinite(static_cast<double>(g))) return false;

  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = static_cast<double>(grads[i]);
    const double m = hp.beta1 * static_cast<double>(state.m[i]) + (1.0 - hp.beta1) * g;
    const double v = hp.beta2 * static_cast<double>(state.v[i]) + (1.0 - hp.beta2) * g * g;
    state.m[i] = static_cast<T>(m);
    state.v[i] = static_cast<T>(v);
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    params[i] -= static_cast<T>(hp.lr * m_hat / (std::sqrt(v_hat) + hp.eps));
  }
  return true;
}

}  // namespace trom::train
