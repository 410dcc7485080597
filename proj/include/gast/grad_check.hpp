#pragma once

#include <functional>

#include "gast/adam.hpp"
#include "gast/tensor.hpp"

namespace gast {

// Scalar-valued tensor function evaluated under a fresh tape.
using TensorFn = std::function<Tensor(Tape&, const Tensor&)>;

namespace detail {
inline double fd_rel_error(double analytic, double numeric) {
  const double denom = std::max(1e-8, std::abs(analytic) + std::abs(numeric));
  return std::abs(analytic - numeric) / denom;
}
}  // namespace detail

// Central-difference gradient oracle. Returns the max over coordinates of
// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
inline double grad_check(const TensorFn& f, Tensor x, double step) {
  if (step <= 0.0) throw ValueError("grad_check step must be positive");
  x.set_requires_grad(true);
  std::vector<double> analytic;
  {
    Tape tape;
    Tensor out = f(tape, x);
    if (out.numel() != 1)
      throw ValueError("grad_check requires a scalar-valued function, got " + shape_str(out.shape()));
    tape.backward(out);
    analytic = x.has_grad() ? x.grad() : std::vector<double>(x.data().size(), 0.0);
  }
  auto eval = [&]() {
    Tape tape;
    return f(tape, x).value();
  };
  double max_err = 0.0;
  auto& d = x.mutable_data();
  for (size_t i = 0; i < d.size(); ++i) {
    const double orig = d[i];
    d[i] = orig + step;
    const double fp = eval();
    d[i] = orig - step;
    const double fm = eval();
    d[i] = orig;
    const double numeric = (fp - fm) / (2.0 * step);
    max_err = std::max(max_err, detail::fd_rel_error(analytic[i], numeric));
  }
  return max_err;
}

// Same oracle over every tensor in a parameter set: one analytic backward,
// then coordinate-wise central differences per parameter.
inline double grad_check_params(const std::function<Tensor(Tape&)>& loss, ParamSet& params,
                                double step) {
  if (step <= 0.0) throw ValueError("grad_check step must be positive");
  params.zero_grads();
  std::vector<std::vector<double>> analytic;
  {
    Tape tape;
    Tensor out = loss(tape);
    if (out.numel() != 1)
      throw ValueError("grad_check requires a scalar-valued function, got " + shape_str(out.shape()));
    tape.backward(out);
    for (auto& [name, t] : params)
      analytic.push_back(t.has_grad() ? t.grad() : std::vector<double>(t.data().size(), 0.0));
    params.zero_grads();
  }
  auto eval = [&]() {
    Tape tape;
    return loss(tape).value();
  };
  double max_err = 0.0;
  size_t idx = 0;
  for (auto& [name, t] : params) {
    auto& d = t.mutable_data();
    for (size_t i = 0; i < d.size(); ++i) {
      const double orig = d[i];
      d[i] = orig + step;
      const double fp = eval();
      d[i] = orig - step;
      const double fm = eval();
      d[i] = orig;
      const double numeric = (fp - fm) / (2.0 * step);
      max_err = std::max(max_err, detail::fd_rel_error(analytic[idx][i], numeric));
    }
    ++idx;
  }
  return max_err;
}

}  // namespace gast
