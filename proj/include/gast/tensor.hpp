#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gast/error.hpp"
#include "gast/rng.hpp"

namespace gast {

inline std::string shape_str(const std::vector<int>& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

inline long numel_of(const std::vector<int>& shape) {
  long n = 1;
  for (int d : shape) n *= d;
  return n;
}

// Dense integer matrix, used for graph structure (relation ids, lookups).
struct IntMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> v;

  IntMatrix() = default;
  IntMatrix(int r, int c, int fill = 0) : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {}
  int& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
  int at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }
  bool operator==(const IntMatrix&) const = default;
};

// Dense boolean matrix (adjacency, attention masks).
struct BoolMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<uint8_t> v;

  BoolMatrix() = default;
  BoolMatrix(int r, int c, bool fill = false)
      : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill ? 1 : 0) {}
  void set(int r, int c, bool b) { v[static_cast<size_t>(r) * cols + c] = b ? 1 : 0; }
  bool at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c] != 0; }
  bool operator==(const BoolMatrix&) const = default;
};

// Dense real tensor, row-major, 64-bit. Cheap to copy: copies share the
// underlying node, so a Tensor behaves as an immutable value under all
// public operations while gradients accumulate on the shared node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false) {
    return Tensor(std::move(shape), {}, requires_grad, /*fill=*/0.0);
  }

  static Tensor full(std::vector<int> shape, double value, bool requires_grad = false) {
    return Tensor(std::move(shape), {}, requires_grad, value);
  }

  static Tensor from_data(std::vector<int> shape, std::vector<double> data,
                          bool requires_grad = false) {
    if (numel_of(shape) != static_cast<long>(data.size()))
      throw ShapeError("tensor data length " + std::to_string(data.size()) +
                       " does not match shape " + shape_str(shape));
    Tensor t;
    t.n_ = std::make_shared<Node>();
    t.n_->shape = std::move(shape);
    t.n_->data = std::move(data);
    t.n_->requires_grad = requires_grad;
    return t;
  }

  static Tensor scalar(double v, bool requires_grad = false) {
    return from_data({1}, {v}, requires_grad);
  }

  static Tensor uniform(std::vector<int> shape, double lo, double hi, Rng& rng,
                        bool requires_grad = false) {
    long n = numel_of(shape);
    std::vector<double> d(static_cast<size_t>(n));
    for (auto& x : d) x = rng.uniform(lo, hi);
    return from_data(std::move(shape), std::move(d), requires_grad);
  }

  // Glorot-style uniform init for a fan_in x fan_out weight matrix.
  static Tensor xavier(int fan_in, int fan_out, Rng& rng) {
    double s = std::sqrt(6.0 / (fan_in + fan_out));
    return uniform({fan_in, fan_out}, -s, s, rng, /*requires_grad=*/true);
  }

  bool defined() const { return n_ != nullptr; }
  const std::vector<int>& shape() const { return n_->shape; }
  int ndim() const { return static_cast<int>(n_->shape.size()); }
  int dim(int i) const { return n_->shape[static_cast<size_t>(i)]; }
  long numel() const { return static_cast<long>(n_->data.size()); }

  // 2-D accessors.
  int rows() const { return n_->shape[0]; }
  int cols() const { return n_->shape.size() > 1 ? n_->shape[1] : 1; }
  double at(int r, int c) const { return n_->data[static_cast<size_t>(r) * cols() + c]; }

  double value() const {
    if (numel() != 1) throw ValueError("value() requires a scalar tensor, got " + shape_str(shape()));
    return n_->data[0];
  }

  const std::vector<double>& data() const { return n_->data; }

  // Exposed for the optimizer, initializers and the finite-difference
  // oracle only; computation never mutates operands through this.
  std::vector<double>& mutable_data() { return n_->data; }

  bool requires_grad() const { return n_->requires_grad; }
  void set_requires_grad(bool b) { n_->requires_grad = b; }

  bool has_grad() const { return !n_->grad.empty(); }
  const std::vector<double>& grad() const { return n_->grad; }

  // Gradient buffers live on the shared node and are written through const
  // handles during backward; tensor *values* stay immutable.
  std::vector<double>& ensure_grad() const {
    if (n_->grad.empty()) n_->grad.assign(n_->data.size(), 0.0);
    return n_->grad;
  }

  void zero_grad() const {
    if (!n_->grad.empty()) std::fill(n_->grad.begin(), n_->grad.end(), 0.0);
  }

  bool same_node(const Tensor& o) const { return n_ == o.n_; }

  bool all_finite() const {
    for (double x : n_->data)
      if (!std::isfinite(x)) return false;
    return true;
  }

 private:
  struct Node {
    std::vector<int> shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until first backward touch
    bool requires_grad = false;
  };

  Tensor(std::vector<int> shape, std::vector<double>, bool requires_grad, double fill) {
    n_ = std::make_shared<Node>();
    n_->data.assign(static_cast<size_t>(numel_of(shape)), fill);
    n_->shape = std::move(shape);
    n_->requires_grad = requires_grad;
  }

  std::shared_ptr<Node> n_;
};

// Ordered record of executed operations. Construction order guarantees the
// topological invariant; backward() replays each record exactly once in
// reverse.
class Tape {
 public:
  void record(std::function<void()> back) { records_.push_back(std::move(back)); }

  size_t size() const { return records_.size(); }

  void clear() { records_.clear(); }

  // Seeds d(loss)/d(loss) = 1 and propagates through every recorded
  // operation in reverse order. Gradients accumulate into each tensor's
  // grad buffer.
  void backward(Tensor loss) {
    if (loss.numel() != 1)
      throw ValueError("backward requires a scalar loss, got " + shape_str(loss.shape()));
    loss.ensure_grad()[0] += 1.0;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) (*it)();
  }

 private:
  std::vector<std::function<void()>> records_;
};

}  // namespace gast
