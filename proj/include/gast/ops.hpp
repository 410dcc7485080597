#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

#include "gast/tensor.hpp"

// Differentiable dense-tensor operations. Every op computes its forward
// value eagerly and, when the result requires a gradient, records a closure
// on the tape that accumulates into the inputs' grad buffers. Closures
// no-op when no gradient reached their output.

namespace gast::ops {

constexpr double kLogEps = 1e-12;  // clamping constant for all logs

namespace detail {

inline void check_2d(const Tensor& t, const char* name) {
  if (t.ndim() != 2)
    throw ShapeError(std::string(name) + " must be 2-D, got " + shape_str(t.shape()));
}

inline bool grad_ready(const Tensor& out) { return out.has_grad(); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear algebra

inline Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  detail::check_2d(a, "matmul lhs");
  detail::check_2d(b, "matmul rhs");
  if (a.cols() != b.rows())
    throw ShapeError("matmul inner dimensions disagree: " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  const int m = a.rows(), k = a.cols(), n = b.cols();
  Tensor out = Tensor::zeros({m, n}, a.requires_grad() || b.requires_grad());
  {
    const double* ad = a.data().data();
    const double* bd = b.data().data();
    double* od = out.mutable_data().data();
    for (int i = 0; i < m; ++i)
      for (int p = 0; p < k; ++p) {
        const double aip = ad[i * k + p];
        if (aip == 0.0) continue;
        const double* brow = bd + p * n;
        double* orow = od + i * n;
        for (int j = 0; j < n; ++j) orow[j] += aip * brow[j];
      }
  }
  if (out.requires_grad()) {
    tape.record([a, b, out]() mutable {
      if (!detail::grad_ready(out)) return;
      const auto& g = out.grad();
      const int m = a.rows(), k = a.cols(), n = b.cols();
      if (a.requires_grad()) {
        auto& ga = a.ensure_grad();
        const double* bd = b.data().data();
        for (int i = 0; i < m; ++i)
          for (int p = 0; p < k; ++p) {
            double s = 0.0;
            const double* grow = g.data() + i * n;
            const double* brow = bd + p * n;
            for (int j = 0; j < n; ++j) s += grow[j] * brow[j];
            ga[static_cast<size_t>(i) * k + p] += s;
          }
      }
      if (b.requires_grad()) {
        auto& gb = b.ensure_grad();
        const double* ad = a.data().data();
        for (int i = 0; i < m; ++i)
          for (int p = 0; p < k; ++p) {
            const double aip = ad[i * k + p];
            if (aip == 0.0) continue;
            const double* grow = g.data() + i * n;
            double* gbrow = gb.data() + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
          }
      }
    });
  }
  return out;
}

inline Tensor transpose(Tape& tape, const Tensor& x) {
  detail::check_2d(x, "transpose");
  const int m = x.rows(), n = x.cols();
  Tensor out = Tensor::zeros({n, m}, x.requires_grad());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.mutable_data()[static_cast<size_t>(j) * m + i] = x.at(i, j);
  if (out.requires_grad()) {
    tape.record([x, out]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gx = x.ensure_grad();
      const auto& g = out.grad();
      const int m = x.rows(), n = x.cols();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) gx[static_cast<size_t>(i) * n + j] += g[static_cast<size_t>(j) * m + i];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Elementwise and shape ops

inline Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError("add shapes disagree: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Tensor out = Tensor::zeros(a.shape(), a.requires_grad() || b.requires_grad());
  for (long i = 0; i < a.numel(); ++i)
    out.mutable_data()[static_cast<size_t>(i)] = a.data()[static_cast<size_t>(i)] + b.data()[static_cast<size_t>(i)];
  if (out.requires_grad()) {
    tape.record([a, b, out]() mutable {
      if (!detail::grad_ready(out)) return;
      const auto& g = out.grad();
      if (a.requires_grad()) {
        auto& ga = a.ensure_grad();
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto& gb = b.ensure_grad();
        for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

// x: m x n, bias: length-n vector broadcast over rows.
inline Tensor add_rows(Tape& tape, const Tensor& x, const Tensor& bias) {
  detail::check_2d(x, "add_rows input");
  if (bias.numel() != x.cols())
    throw ShapeError("add_rows bias length " + shape_str(bias.shape()) + " does not match " +
                     shape_str(x.shape()));
  const int m = x.rows(), n = x.cols();
  Tensor out = Tensor::zeros({m, n}, x.requires_grad() || bias.requires_grad());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out.mutable_data()[static_cast<size_t>(i) * n + j] = x.at(i, j) + bias.data()[static_cast<size_t>(j)];
  if (out.requires_grad()) {
    tape.record([x, bias, out]() mutable {
      if (!detail::grad_ready(out)) return;
      const auto& g = out.grad();
      const int m = x.rows(), n = x.cols();
      if (x.requires_grad()) {
        auto& gx = x.ensure_grad();
        for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
      }
      if (bias.requires_grad()) {
        auto& gb = bias.ensure_grad();
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) gb[static_cast<size_t>(j)] += g[static_cast<size_t>(i) * n + j];
      }
    });
  }
  return out;
}

inline Tensor scale(Tape& tape, const Tensor& x, double c) {
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  for (long i = 0; i < x.numel(); ++i)
    out.mutable_data()[static_cast<size_t>(i)] = c * x.data()[static_cast<size_t>(i)];
  if (out.requires_grad()) {
    tape.record([x, out, c]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gx = x.ensure_grad();
      const auto& g = out.grad();
      for (size_t i = 0; i < g.size(); ++i) gx[i] += c * g[i];
    });
  }
  return out;
}

inline Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError("mul shapes disagree: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Tensor out = Tensor::zeros(a.shape(), a.requires_grad() || b.requires_grad());
  for (long i = 0; i < a.numel(); ++i)
    out.mutable_data()[static_cast<size_t>(i)] = a.data()[static_cast<size_t>(i)] * b.data()[static_cast<size_t>(i)];
  if (out.requires_grad()) {
    tape.record([a, b, out]() mutable {
      if (!detail::grad_ready(out)) return;
      const auto& g = out.grad();
      if (a.requires_grad()) {
        auto& ga = a.ensure_grad();
        for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b.data()[i];
      }
      if (b.requires_grad()) {
        auto& gb = b.ensure_grad();
        for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a.data()[i];
      }
    });
  }
  return out;
}

inline Tensor relu(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  for (long i = 0; i < x.numel(); ++i) {
    double v = x.data()[static_cast<size_t>(i)];
    out.mutable_data()[static_cast<size_t>(i)] = v > 0.0 ? v : 0.0;
  }
  if (out.requires_grad()) {
    tape.record([x, out]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gx = x.ensure_grad();
      const auto& g = out.grad();
      for (size_t i = 0; i < g.size(); ++i)
        if (x.data()[i] > 0.0) gx[i] += g[i];
    });
  }
  return out;
}

inline Tensor leaky_relu(Tape& tape, const Tensor& x, double slope) {
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  for (long i = 0; i < x.numel(); ++i) {
    double v = x.data()[static_cast<size_t>(i)];
    out.mutable_data()[static_cast<size_t>(i)] = v > 0.0 ? v : slope * v;
  }
  if (out.requires_grad()) {
    tape.record([x, out, slope]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gx = x.ensure_grad();
      const auto& g = out.grad();
      for (size_t i = 0; i < g.size(); ++i) gx[i] += (x.data()[i] > 0.0 ? 1.0 : slope) * g[i];
    });
  }
  return out;
}

inline Tensor concat_last_dim(Tape& tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw ValueError("concat_last_dim needs at least one input");
  const int m = parts[0].rows();
  int total = 0;
  bool rg = false;
  for (const auto& p : parts) {
    detail::check_2d(p, "concat_last_dim input");
    if (p.rows() != m)
      throw ShapeError("concat_last_dim row counts disagree: " + shape_str(parts[0].shape()) +
                       " vs " + shape_str(p.shape()));
    total += p.cols();
    rg = rg || p.requires_grad();
  }
  Tensor out = Tensor::zeros({m, total}, rg);
  int off = 0;
  for (const auto& p : parts) {
    const int n = p.cols();
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        out.mutable_data()[static_cast<size_t>(i) * total + off + j] = p.at(i, j);
    off += n;
  }
  if (rg) {
    std::vector<Tensor> held(parts.begin(), parts.end());
    tape.record([held = std::move(held), out, total]() mutable {
      if (!detail::grad_ready(out)) return;
      const auto& g = out.grad();
      const int m = out.rows();
      int off = 0;
      for (auto& p : held) {
        const int n = p.cols();
        if (p.requires_grad()) {
          auto& gp = p.ensure_grad();
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
              gp[static_cast<size_t>(i) * n + j] += g[static_cast<size_t>(i) * total + off + j];
        }
        off += n;
      }
    });
  }
  return out;
}

inline Tensor concat_last_dim(Tape& tape, std::initializer_list<Tensor> parts) {
  std::vector<Tensor> v(parts);
  return concat_last_dim(tape, std::span<const Tensor>(v));
}

// Stacks 1-D rows (or 2-D blocks) vertically.
inline Tensor concat_rows(Tape& tape, std::span<const Tensor> parts) {
  if (parts.empty()) throw ValueError("concat_rows needs at least one input");
  const int n = parts[0].cols();
  int total = 0;
  bool rg = false;
  for (const auto& p : parts) {
    if (p.cols() != n)
      throw ShapeError("concat_rows widths disagree: " + shape_str(parts[0].shape()) + " vs " +
                       shape_str(p.shape()));
    total += p.ndim() == 1 ? 1 : p.rows();
    rg = rg || p.requires_grad();
  }
  Tensor out = Tensor::zeros({total, n}, rg);
  size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p.data().begin(), p.data().end(), out.mutable_data().begin() + off);
    off += p.data().size();
  }
  if (rg) {
    std::vector<Tensor> held(parts.begin(), parts.end());
    tape.record([held = std::move(held), out]() mutable {
      if (!detail::grad_ready(out)) return;
      const auto& g = out.grad();
      size_t off = 0;
      for (auto& p : held) {
        if (p.requires_grad()) {
          auto& gp = p.ensure_grad();
          for (size_t i = 0; i < gp.size(); ++i) gp[i] += g[off + i];
        }
        off += p.data().size();
      }
    });
  }
  return out;
}

inline Tensor mean_rows(Tape& tape, const Tensor& x) {
  detail::check_2d(x, "mean_rows input");
  const int m = x.rows(), n = x.cols();
  if (m < 1) throw ValueError("mean_rows on empty input");
  Tensor out = Tensor::zeros({1, n}, x.requires_grad());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out.mutable_data()[static_cast<size_t>(j)] += x.at(i, j) / m;
  if (out.requires_grad()) {
    tape.record([x, out]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gx = x.ensure_grad();
      const auto& g = out.grad();
      const int m = x.rows(), n = x.cols();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) gx[static_cast<size_t>(i) * n + j] += g[static_cast<size_t>(j)] / m;
    });
  }
  return out;
}

inline Tensor reshape(Tape& tape, const Tensor& x, std::vector<int> shape) {
  if (numel_of(shape) != x.numel())
    throw ShapeError("reshape from " + shape_str(x.shape()) + " to " + shape_str(shape) +
                     " changes element count");
  Tensor out = Tensor::from_data(std::move(shape), x.data(), x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gx = x.ensure_grad();
      const auto& g = out.grad();
      for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  return out;
}

// In training mode zeroes each entry with probability p and scales
// survivors by 1/(1-p); identity in eval mode.
inline Tensor dropout(Tape& tape, const Tensor& x, double p, bool train, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw ValueError("dropout rate must be in [0, 1), got " + std::to_string(p));
  if (!train || p == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(static_cast<size_t>(x.numel()));
  for (auto& m : mask) m = rng.uniform() >= p ? keep_scale : 0.0;
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  for (size_t i = 0; i < mask.size(); ++i) out.mutable_data()[i] = x.data()[i] * mask[i];
  if (out.requires_grad()) {
    tape.record([x, out, mask = std::move(mask)]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gx = x.ensure_grad();
      const auto& g = out.grad();
      for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Softmax and losses

// Row-wise softmax with per-row max subtraction. Masked-out entries (mask
// false) are exactly 0 in the output and receive exactly 0 gradient.
inline Tensor softmax_rows(Tape& tape, const Tensor& x, const BoolMatrix* mask = nullptr) {
  detail::check_2d(x, "softmax input");
  const int m = x.rows(), n = x.cols();
  if (mask && (mask->rows != m || mask->cols != n))
    throw ShapeError("softmax mask is " + std::to_string(mask->rows) + "x" + std::to_string(mask->cols) +
                     ", input is " + shape_str(x.shape()));
  Tensor out = Tensor::zeros({m, n}, x.requires_grad());
  for (int i = 0; i < m; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
      if (!mask || mask->at(i, j)) mx = std::max(mx, x.at(i, j));
    if (!std::isfinite(mx))
      throw ValueError("softmax row " + std::to_string(i) + " is degenerate: all entries masked");
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!mask || mask->at(i, j)) {
        double e = std::exp(x.at(i, j) - mx);
        out.mutable_data()[static_cast<size_t>(i) * n + j] = e;
        sum += e;
      }
    }
    for (int j = 0; j < n; ++j) out.mutable_data()[static_cast<size_t>(i) * n + j] /= sum;
  }
  if (out.requires_grad()) {
    tape.record([x, out]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gx = x.ensure_grad();
      const auto& g = out.grad();
      const auto& y = out.data();
      const int m = x.rows(), n = x.cols();
      for (int i = 0; i < m; ++i) {
        const size_t base = static_cast<size_t>(i) * n;
        double dot = 0.0;
        for (int j = 0; j < n; ++j) dot += g[base + j] * y[base + j];
        // masked entries have y == 0, so they contribute and receive nothing
        for (int j = 0; j < n; ++j) gx[base + j] += y[base + j] * (g[base + j] - dot);
      }
    });
  }
  return out;
}

// ln(max(x, kLogEps)); gradient is 1/x inside the clamp, 0 where clamped.
inline Tensor log_clamped(Tape& tape, const Tensor& x) {
  Tensor out = Tensor::zeros(x.shape(), x.requires_grad());
  for (long i = 0; i < x.numel(); ++i)
    out.mutable_data()[static_cast<size_t>(i)] = std::log(std::max(x.data()[static_cast<size_t>(i)], kLogEps));
  if (out.requires_grad()) {
    tape.record([x, out]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gx = x.ensure_grad();
      const auto& g = out.grad();
      for (size_t i = 0; i < g.size(); ++i)
        if (x.data()[i] > kLogEps) gx[i] += g[i] / x.data()[i];
    });
  }
  return out;
}

inline Tensor sum_all(Tape& tape, const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  Tensor out = Tensor::from_data({1}, {s}, x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gx = x.ensure_grad();
      const double g = out.grad()[0];
      for (auto& v : gx) v += g;
    });
  }
  return out;
}

inline Tensor select_column(Tape& tape, const Tensor& x, int col) {
  detail::check_2d(x, "select_column input");
  const int m = x.rows(), n = x.cols();
  if (col < 0 || col >= n) throw ValueError("select_column index " + std::to_string(col) + " out of range");
  Tensor out = Tensor::zeros({m}, x.requires_grad());
  for (int i = 0; i < m; ++i) out.mutable_data()[static_cast<size_t>(i)] = x.at(i, col);
  if (out.requires_grad()) {
    tape.record([x, out, col]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gx = x.ensure_grad();
      const auto& g = out.grad();
      const int n = x.cols();
      for (int i = 0; i < x.rows(); ++i) gx[static_cast<size_t>(i) * n + col] += g[static_cast<size_t>(i)];
    });
  }
  return out;
}

// -(1/m) sum_i [ y ln p + (1-y) ln(1-p) ] with p clamped to [eps, 1-eps].
inline Tensor binary_cross_entropy(Tape& tape, const Tensor& p_hat, const Tensor& y) {
  if (p_hat.numel() != y.numel())
    throw ShapeError("binary_cross_entropy lengths disagree: " + shape_str(p_hat.shape()) + " vs " +
                     shape_str(y.shape()));
  const long m = p_hat.numel();
  if (m < 1) throw ValueError("binary_cross_entropy on empty input");
  for (double v : y.data())
    if (v != 0.0 && v != 1.0)
      throw ValueError("binary_cross_entropy labels must be 0 or 1, got " + std::to_string(v));
  double loss = 0.0;
  std::vector<double> pc(static_cast<size_t>(m));
  for (long i = 0; i < m; ++i) {
    double p = std::clamp(p_hat.data()[static_cast<size_t>(i)], kLogEps, 1.0 - kLogEps);
    pc[static_cast<size_t>(i)] = p;
    const double yv = y.data()[static_cast<size_t>(i)];
    loss -= yv * std::log(p) + (1.0 - yv) * std::log(1.0 - p);
  }
  loss /= static_cast<double>(m);
  Tensor out = Tensor::from_data({1}, {loss}, p_hat.requires_grad());
  if (out.requires_grad()) {
    tape.record([p_hat, y, out, pc = std::move(pc)]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gp = p_hat.ensure_grad();
      const double g = out.grad()[0];
      const long m = p_hat.numel();
      for (long i = 0; i < m; ++i) {
        const double raw = p_hat.data()[static_cast<size_t>(i)];
        if (raw <= kLogEps || raw >= 1.0 - kLogEps) continue;  // clamped: flat
        const double p = pc[static_cast<size_t>(i)];
        const double yv = y.data()[static_cast<size_t>(i)];
        gp[static_cast<size_t>(i)] += g * (p - yv) / (p * (1.0 - p) * static_cast<double>(m));
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Index ops (embedding lookups and typed-relation plumbing)

// out[i, :] = table[ids[i], :]
inline Tensor gather_rows(Tape& tape, const Tensor& table, const std::vector<int>& ids) {
  detail::check_2d(table, "gather_rows table");
  const int n = static_cast<int>(ids.size()), d = table.cols();
  for (int id : ids)
    if (id < 0 || id >= table.rows())
      throw ValueError("gather_rows id " + std::to_string(id) + " out of range for " +
                       shape_str(table.shape()));
  Tensor out = Tensor::zeros({n, d}, table.requires_grad());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j)
      out.mutable_data()[static_cast<size_t>(i) * d + j] = table.at(ids[static_cast<size_t>(i)], j);
  if (out.requires_grad()) {
    tape.record([table, out, ids]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gt = table.ensure_grad();
      const auto& g = out.grad();
      const int d = table.cols();
      for (size_t i = 0; i < ids.size(); ++i)
        for (int j = 0; j < d; ++j)
          gt[static_cast<size_t>(ids[i]) * d + j] += g[i * d + j];
    });
  }
  return out;
}

// out[i, j] = vec[ids(i, j)]
inline Tensor pair_lookup(Tape& tape, const Tensor& vec, const IntMatrix& ids) {
  if (vec.ndim() != 1)
    throw ShapeError("pair_lookup table must be 1-D, got " + shape_str(vec.shape()));
  Tensor out = Tensor::zeros({ids.rows, ids.cols}, vec.requires_grad());
  for (int i = 0; i < ids.rows; ++i)
    for (int j = 0; j < ids.cols; ++j)
      out.mutable_data()[static_cast<size_t>(i) * ids.cols + j] = vec.data()[static_cast<size_t>(ids.at(i, j))];
  if (out.requires_grad()) {
    tape.record([vec, out, ids]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gv = vec.ensure_grad();
      const auto& g = out.grad();
      for (int i = 0; i < ids.rows; ++i)
        for (int j = 0; j < ids.cols; ++j)
          gv[static_cast<size_t>(ids.at(i, j))] += g[static_cast<size_t>(i) * ids.cols + j];
    });
  }
  return out;
}

// out[i, j] = x[i, ids(i, j)]
inline Tensor rowwise_lookup(Tape& tape, const Tensor& x, const IntMatrix& ids) {
  detail::check_2d(x, "rowwise_lookup input");
  if (ids.rows != x.rows())
    throw ShapeError("rowwise_lookup row counts disagree: " + shape_str(x.shape()));
  Tensor out = Tensor::zeros({ids.rows, ids.cols}, x.requires_grad());
  const int n = x.cols();
  for (int i = 0; i < ids.rows; ++i)
    for (int j = 0; j < ids.cols; ++j)
      out.mutable_data()[static_cast<size_t>(i) * ids.cols + j] = x.at(i, ids.at(i, j));
  if (out.requires_grad()) {
    tape.record([x, out, ids, n]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gx = x.ensure_grad();
      const auto& g = out.grad();
      for (int i = 0; i < ids.rows; ++i)
        for (int j = 0; j < ids.cols; ++j)
          gx[static_cast<size_t>(i) * n + ids.at(i, j)] += g[static_cast<size_t>(i) * ids.cols + j];
    });
  }
  return out;
}

// out[i, ids(i, j)] += w[i, j]; out has n_cols columns.
inline Tensor scatter_by_ids(Tape& tape, const Tensor& w, const IntMatrix& ids, int n_cols) {
  detail::check_2d(w, "scatter_by_ids weights");
  if (ids.rows != w.rows() || ids.cols != w.cols())
    throw ShapeError("scatter_by_ids index shape disagrees with " + shape_str(w.shape()));
  Tensor out = Tensor::zeros({w.rows(), n_cols}, w.requires_grad());
  for (int i = 0; i < ids.rows; ++i)
    for (int j = 0; j < ids.cols; ++j)
      out.mutable_data()[static_cast<size_t>(i) * n_cols + ids.at(i, j)] += w.at(i, j);
  if (out.requires_grad()) {
    tape.record([w, out, ids, n_cols]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gw = w.ensure_grad();
      const auto& g = out.grad();
      for (int i = 0; i < ids.rows; ++i)
        for (int j = 0; j < ids.cols; ++j)
          gw[static_cast<size_t>(i) * ids.cols + j] += g[static_cast<size_t>(i) * n_cols + ids.at(i, j)];
    });
  }
  return out;
}

// out[i, j] = u[i] + v[j] for column vectors u (m), v (n).
inline Tensor outer_sum(Tape& tape, const Tensor& u, const Tensor& v) {
  const int m = static_cast<int>(u.numel()), n = static_cast<int>(v.numel());
  Tensor out = Tensor::zeros({m, n}, u.requires_grad() || v.requires_grad());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out.mutable_data()[static_cast<size_t>(i) * n + j] = u.data()[static_cast<size_t>(i)] + v.data()[static_cast<size_t>(j)];
  if (out.requires_grad()) {
    tape.record([u, v, out]() mutable {
      if (!detail::grad_ready(out)) return;
      const auto& g = out.grad();
      const int m = static_cast<int>(u.numel()), n = static_cast<int>(v.numel());
      if (u.requires_grad()) {
        auto& gu = u.ensure_grad();
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) gu[static_cast<size_t>(i)] += g[static_cast<size_t>(i) * n + j];
      }
      if (v.requires_grad()) {
        auto& gv = v.ensure_grad();
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) gv[static_cast<size_t>(j)] += g[static_cast<size_t>(i) * n + j];
      }
    });
  }
  return out;
}

// Contiguous slice of the flat storage, reinterpreted under a new shape.
inline Tensor slice_flat(Tape& tape, const Tensor& x, long from, std::vector<int> shape) {
  const long len = numel_of(shape);
  if (from < 0 || from + len > x.numel())
    throw ShapeError("slice_flat [" + std::to_string(from) + ", " + std::to_string(from + len) +
                     ") out of range for " + shape_str(x.shape()));
  std::vector<double> d(x.data().begin() + from, x.data().begin() + from + len);
  Tensor out = Tensor::from_data(std::move(shape), std::move(d), x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out, from]() mutable {
      if (!detail::grad_ready(out)) return;
      auto& gx = x.ensure_grad();
      const auto& g = out.grad();
      for (size_t i = 0; i < g.size(); ++i) gx[static_cast<size_t>(from) + i] += g[i];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Layer normalization (config-flag extra, off by default)

inline Tensor layer_norm(Tape& tape, const Tensor& x, const Tensor& gamma, const Tensor& beta,
                         double eps = 1e-5) {
  detail::check_2d(x, "layer_norm input");
  const int m = x.rows(), n = x.cols();
  if (gamma.numel() != n || beta.numel() != n)
    throw ShapeError("layer_norm gamma/beta must have length " + std::to_string(n));
  Tensor out = Tensor::zeros({m, n}, x.requires_grad() || gamma.requires_grad() || beta.requires_grad());
  std::vector<double> xhat(static_cast<size_t>(m) * n), inv_std(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += x.at(i, j);
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) var += (x.at(i, j) - mu) * (x.at(i, j) - mu);
    var /= n;
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[static_cast<size_t>(i)] = is;
    for (int j = 0; j < n; ++j) {
      const double xh = (x.at(i, j) - mu) * is;
      xhat[static_cast<size_t>(i) * n + j] = xh;
      out.mutable_data()[static_cast<size_t>(i) * n + j] = gamma.data()[static_cast<size_t>(j)] * xh + beta.data()[static_cast<size_t>(j)];
    }
  }
  if (out.requires_grad()) {
    tape.record([x, gamma, beta, out, xhat = std::move(xhat), inv_std = std::move(inv_std)]() mutable {
      if (!detail::grad_ready(out)) return;
      const auto& g = out.grad();
      const int m = x.rows(), n = x.cols();
      if (gamma.requires_grad()) {
        auto& gg = gamma.ensure_grad();
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) gg[static_cast<size_t>(j)] += g[static_cast<size_t>(i) * n + j] * xhat[static_cast<size_t>(i) * n + j];
      }
      if (beta.requires_grad()) {
        auto& gb = beta.ensure_grad();
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < n; ++j) gb[static_cast<size_t>(j)] += g[static_cast<size_t>(i) * n + j];
      }
      if (x.requires_grad()) {
        auto& gx = x.ensure_grad();
        for (int i = 0; i < m; ++i) {
          const size_t base = static_cast<size_t>(i) * n;
          double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
          for (int j = 0; j < n; ++j) {
            const double dxh = g[base + j] * gamma.data()[static_cast<size_t>(j)];
            mean_dxhat += dxh;
            mean_dxhat_xhat += dxh * xhat[base + j];
          }
          mean_dxhat /= n;
          mean_dxhat_xhat /= n;
          for (int j = 0; j < n; ++j) {
            const double dxh = g[base + j] * gamma.data()[static_cast<size_t>(j)];
            gx[base + j] += inv_std[static_cast<size_t>(i)] * (dxh - mean_dxhat - xhat[base + j] * mean_dxhat_xhat);
          }
        }
      }
    });
  }
  return out;
}

}  // namespace gast::ops
