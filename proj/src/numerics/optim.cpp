#include "sentiaug/numerics/optim.hpp"

#include <cmath>
#include <tuple>
#include <unordered_map>

namespace sentiaug::num {

namespace {

void require_grads(const ParameterList& params, const char* who) {
  for (const auto& p : params) {
    if (!p.tensor.defined() || !p.tensor.requires_grad()) {
      throw std::invalid_argument(std::string(who) + ": parameter '" + p.name +
                                  "' has no gradient buffer (requires_grad is off)");
    }
  }
}

// Clips and returns (norm before, mean |g| after, finite).
std::tuple<double, double, bool> clip_and_measure(const ParameterList& params, double max_norm) {
  double sq = 0.0;
  std::size_t count = 0;
  for (const auto& p : params) {
    for (double g : p.tensor.grad()) sq += g * g;
    count += p.tensor.numel();
  }
  const double norm = std::sqrt(sq);
  bool finite = std::isfinite(norm);
  if (finite && max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (const auto& p : params) {
      auto t = p.tensor;
      for (double& g : t.mutable_grad()) g *= s;
    }
  }
  double abs_sum = 0.0;
  for (const auto& p : params)
    for (double g : p.tensor.grad()) abs_sum += std::abs(g);
  const double mean_abs = count ? abs_sum / static_cast<double>(count) : 0.0;
  finite = finite && std::isfinite(mean_abs);
  return {norm, mean_abs, finite};
}

void zero_all(const ParameterList& params) {
  for (const auto& p : params) {
    auto t = p.tensor;
    t.zero_grad();
  }
}

}  // namespace

double clip_grad_norm(const ParameterList& params, double max_norm) {
  return std::get<0>(clip_and_measure(params, max_norm));
}

Adam::Adam(ParameterList params, AdamConfig config) : params_(std::move(params)), config_(config) {
  require_grads(params_, "Adam");
  for (const auto& p : params_) {
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

StepReport Adam::step(double divergence_limit) {
  StepReport report;
  auto [norm, mean_abs, finite] = clip_and_measure(params_, config_.max_grad_norm);
  report.grad_norm = norm;
  report.mean_abs_grad = mean_abs;
  if (!finite || mean_abs > divergence_limit) {
    report.applied = false;
    zero_all(params_);
    return report;
  }
  ++step_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto t = params_[k].tensor;
    auto w = t.mutable_data();
    auto g = t.grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
  zero_all(params_);
  return report;
}

void Adam::zero_grad() { zero_all(params_); }

Adam Adam::rebind(ParameterList params) const {
  if (params.size() != params_.size()) {
    throw std::invalid_argument("Adam::rebind: parameter count differs");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].tensor.shape() != params_[k].tensor.shape()) {
      throw ShapeError("Adam::rebind: parameter '" + params[k].name + "' has shape " +
                       shape_str(params[k].tensor.shape()) + ", expected " +
                       shape_str(params_[k].tensor.shape()));
    }
  }
  Adam copy(std::move(params), config_);
  copy.m_ = m_;
  copy.v_ = v_;
  copy.step_ = step_;
  return copy;
}

ParameterList Adam::state_tensors(const std::string& prefix) const {
  ParameterList out;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    out.push_back({prefix + "m/" + params_[k].name, Tensor::from(params_[k].tensor.shape(), m_[k])});
    out.push_back({prefix + "v/" + params_[k].name, Tensor::from(params_[k].tensor.shape(), v_[k])});
  }
  out.push_back({prefix + "step", Tensor::scalar(static_cast<double>(step_))});
  return out;
}

void Adam::load_state(const ParameterList& saved, const std::string& prefix) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& s : saved) by_name[s.name] = &s.tensor;
  auto fetch = [&](const std::string& name, std::size_t n) -> std::vector<double> {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw std::invalid_argument("Adam::load_state: missing '" + name + "'");
    if (it->second->numel() != n) throw ShapeError("Adam::load_state: size mismatch for '" + name + "'");
    auto d = it->second->data();
    return {d.begin(), d.end()};
  };
  for (std::size_t k = 0; k < params_.size(); ++k) {
    m_[k] = fetch(prefix + "m/" + params_[k].name, params_[k].tensor.numel());
    v_[k] = fetch(prefix + "v/" + params_[k].name, params_[k].tensor.numel());
  }
  step_ = static_cast<std::int64_t>(fetch(prefix + "step", 1)[0]);
}

SgdMomentum::SgdMomentum(ParameterList params, double lr, double momentum, double max_grad_norm)
    : params_(std::move(params)), lr_(lr), momentum_(momentum), max_grad_norm_(max_grad_norm) {
  require_grads(params_, "SgdMomentum");
  for (const auto& p : params_) velocity_.emplace_back(p.tensor.numel(), 0.0);
}

StepReport SgdMomentum::step() {
  StepReport report;
  auto [norm, mean_abs, finite] = clip_and_measure(params_, max_grad_norm_);
  report.grad_norm = norm;
  report.mean_abs_grad = mean_abs;
  if (!finite) {
    report.applied = false;
    zero_all(params_);
    return report;
  }
  ++step_;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto t = params_[k].tensor;
    auto w = t.mutable_data();
    auto g = t.grad();
    auto& vel = velocity_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      vel[i] = momentum_ * vel[i] + g[i];
      w[i] -= lr_ * vel[i];
    }
  }
  zero_all(params_);
  return report;
}

void copy_parameters(const ParameterList& from, const ParameterList& to) {
  if (from.size() != to.size()) throw std::invalid_argument("copy_parameters: parameter count differs");
  for (std::size_t k = 0; k < from.size(); ++k) {
    if (from[k].tensor.shape() != to[k].tensor.shape()) {
      throw ShapeError("copy_parameters: shape mismatch for '" + from[k].name + "'");
    }
    auto dst = to[k].tensor;
    auto src = from[k].tensor.data();
    std::copy(src.begin(), src.end(), dst.mutable_data().begin());
  }
}

}  // namespace sentiaug::num
