#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "gast/tensor.hpp"

namespace gast {

// Named, insertion-ordered set of trainable tensors. Order is the
// deterministic iteration/serialization order everywhere.
class ParamSet {
 public:
  void add(std::string name, Tensor t) {
    if (find(name)) throw ValueError("duplicate parameter name: " + name);
    t.set_requires_grad(true);
    items_.emplace_back(std::move(name), std::move(t));
  }

  Tensor* find(const std::string& name) {
    for (auto& [n, t] : items_)
      if (n == name) return &t;
    return nullptr;
  }

  Tensor& at(const std::string& name) {
    Tensor* t = find(name);
    if (!t) throw ValueError("unknown parameter: " + name);
    return *t;
  }

  size_t size() const { return items_.size(); }
  auto begin() { return items_.begin(); }
  auto end() { return items_.end(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  long total_parameters() const {
    long n = 0;
    for (const auto& [name, t] : items_) n += t.numel();
    return n;
  }

  void zero_grads() {
    for (auto& [name, t] : items_) t.zero_grad();
  }

  std::vector<std::vector<double>> snapshot() const {
    std::vector<std::vector<double>> s;
    s.reserve(items_.size());
    for (const auto& [name, t] : items_) s.push_back(t.data());
    return s;
  }

  void restore(const std::vector<std::vector<double>>& s) {
    if (s.size() != items_.size()) throw ValueError("snapshot size does not match parameter set");
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i].size() != items_[i].second.data().size())
        throw ValueError("snapshot shape mismatch for parameter " + items_[i].first);
      items_[i].second.mutable_data() = s[i];
    }
  }

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment buffers aligned with a ParamSet's order.
class AdamState {
 public:
  AdamState(const ParamSet& params, AdamConfig cfg = {}) : cfg_(cfg) {
    for (const auto& [name, t] : params) {
      m_.emplace_back(t.numel(), 0.0);
      v_.emplace_back(t.numel(), 0.0);
    }
  }

  const AdamConfig& config() const { return cfg_; }
  long step_count() const { return step_; }

  friend void adam_step(ParamSet& params, AdamState& state);

 private:
  AdamConfig cfg_;
  long step_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

// Bias-corrected Adam update over every parameter; gradients are zeroed
// after the update.
inline void adam_step(ParamSet& params, AdamState& state) {
  if (params.size() != state.m_.size())
    throw ValueError("Adam state does not match parameter set");
  state.step_ += 1;
  const auto& cfg = state.cfg_;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step_));
  size_t idx = 0;
  for (auto& [name, t] : params) {
    if (!t.has_grad()) throw ValueError("uninitialized gradient for parameter '" + name + "'");
    const auto& g = t.grad();
    auto& m = state.m_[idx];
    auto& v = state.v_[idx];
    auto& d = t.mutable_data();
    for (size_t i = 0; i < g.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      d[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
    t.zero_grad();
    ++idx;
  }
}

}  // namespace gast
