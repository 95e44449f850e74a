#include "omnirl/adamw.h"

#include <cmath>
#include <string>

#include "omnirl/errors.h"

namespace omnirl {

double clip_grad_norm(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grad) g *= scale;
  }
  return norm;
}

void adamw_step(std::span<double> params, std::span<const double> grad, OptimizerState& state,
                double lr, const AdamWConfig& config) {
  if (grad.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw InputError("adamw_step: shape mismatch");
  }
  for (size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw NumericError("adamw_step: non-finite gradient at index " + std::to_string(i));
    }
  }
  std::vector<double> g(grad.begin(), grad.end());
  clip_grad_norm(g, config.grad_clip);

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(config.beta1, t);
  const double bc2 = 1.0 - std::pow(config.beta2, t);
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g[i] * g[i];
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= lr * (m_hat / (std::sqrt(v_hat) + config.eps) + state.weight_decay * params[i]);
  }
}

}  // namespace omnirl
