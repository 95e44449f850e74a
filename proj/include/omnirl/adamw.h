#ifndef OMNIRL_ADAMW_H_
#define OMNIRL_ADAMW_H_

#include <cstdint>
#include <span>
#include <vector>

namespace omnirl {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double grad_clip = 1.0;  // global L2 norm; <= 0 disables
};

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  int64_t step = 0;
  double weight_decay = 0.0;

  OptimizerState() = default;
  explicit OptimizerState(size_t n, double decay = 0.0) : m(n, 0.0), v(n, 0.0), weight_decay(decay) {}
  bool operator==(const OptimizerState&) const = default;
};

// Scales `grad` in place so that its L2 norm is at most max_norm. Returns
// the norm before clipping.
double clip_grad_norm(std::span<double> grad, double max_norm);

// One AdamW update: clip, update moments, bias-correct, then
//   p -= lr * (m_hat / (sqrt(v_hat) + eps) + weight_decay * p).
// Throws NumericError on a non-finite gradient (params and state untouched).
void adamw_step(std::span<double> params, std::span<const double> grad, OptimizerState& state,
                double lr, const AdamWConfig& config = {});

}  // namespace omnirl

#endif  // OMNIRL_ADAMW_H_
