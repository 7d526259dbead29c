#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sentiaug/numerics/tensor.hpp"

namespace sentiaug::num {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};
using ParameterList = std::vector<NamedTensor>;

inline constexpr double kMaxGradNorm = 5.0;

// Scales all grads in place so their joint L2 norm is at most max_norm.
// Returns the norm before scaling.
double clip_grad_norm(const ParameterList& params, double max_norm = kMaxGradNorm);

struct StepReport {
  double grad_norm = 0.0;       // before clipping
  double mean_abs_grad = 0.0;   // after clipping
  bool applied = true;          // false when the divergence guard tripped
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double max_grad_norm = kMaxGradNorm;  // <= 0 disables clipping
};

class Adam {
 public:
  Adam(ParameterList params, AdamConfig config);

  // Clip, apply one Adam update, zero the grads. When mean |grad| after
  // clipping exceeds divergence_limit (or is not finite) no update is made.
  StepReport step(double divergence_limit = 1e3);
  void zero_grad();

  std::int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }
  const ParameterList& params() const { return params_; }

  // Same moments and step counter, bound to a different parameter list of the
  // same layout.
  Adam rebind(ParameterList params) const;

  // Moment buffers as named tensors ("<prefix>m/<name>", "<prefix>v/<name>",
  // "<prefix>step") for checkpointing.
  ParameterList state_tensors(const std::string& prefix) const;
  void load_state(const ParameterList& saved, const std::string& prefix);

 private:
  ParameterList params_;
  AdamConfig config_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::int64_t step_ = 0;
};

class SgdMomentum {
 public:
  SgdMomentum(ParameterList params, double lr, double momentum = 0.9,
              double max_grad_norm = kMaxGradNorm);
  StepReport step();

 private:
  ParameterList params_;
  double lr_;
  double momentum_;
  double max_grad_norm_;
  std::vector<std::vector<double>> velocity_;
  std::int64_t step_ = 0;
};

// Copies values of `from` into same-named, same-shaped tensors of `to`.
void copy_parameters(const ParameterList& from, const ParameterList& to);

}  // namespace sentiaug::num
