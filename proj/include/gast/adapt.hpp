#pragma once

#include <iostream>
#include <vector>

#include "gast/adam.hpp"
#include "gast/ops.hpp"

// Adaptive-training heads and losses: a 2-way sentiment classifier trained
// on labeled source data, a domain discriminator trained against reversed
// domain labels (gradients flow into the whole encoder, pushing features
// toward domain confusion), an entropy penalty over unlabeled predictions,
// and the gradient-reversal alternative used by the non_ids ablation.

namespace gast {

struct LinearHead {
  Tensor w;  // in x 2
  Tensor b;  // 2

  static LinearHead init(int in_width, Rng& rng) {
    LinearHead h;
    h.w = Tensor::xavier(in_width, 2, rng);
    h.b = Tensor::zeros({2}, true);
    return h;
  }

  void register_into(ParamSet& params, const std::string& prefix) const {
    params.add(prefix + ".w", w);
    params.add(prefix + ".b", b);
  }
};

using SentimentHead = LinearHead;  // classes: 0 = negative, 1 = positive
using DomainHead = LinearHead;     // classes: 0 = source, 1 = target

struct LossWeights {
  double lambda_c = 1.0;
  double lambda_d = 1.0;
  double lambda_a = 0.8;
};

// batch_size x 2 row-stochastic class probabilities.
inline Tensor head_probs(Tape& tape, const Tensor& features, const LinearHead& head) {
  return ops::softmax_rows(tape, ops::add_rows(tape, ops::matmul(tape, features, head.w), head.b));
}

namespace detail {
inline Tensor labels_tensor(const std::vector<int>& labels) {
  std::vector<double> v(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) v[i] = static_cast<double>(labels[i]);
  return Tensor::from_data({static_cast<int>(labels.size())}, std::move(v));
}
}  // namespace detail

// Binary cross-entropy on the positive-class probability over a labeled
// source batch.
inline Tensor sentiment_loss(Tape& tape, const Tensor& features, const SentimentHead& head,
                             const std::vector<int>& labels) {
  if (static_cast<long>(labels.size()) != features.rows())
    throw ShapeError("label count does not match batch of " + std::to_string(features.rows()));
  for (int y : labels)
    if (y != 0 && y != 1) throw ValueError("sentiment_loss batch contains an unlabeled sample");
  Tensor probs = head_probs(tape, features, head);
  return ops::binary_cross_entropy(tape, ops::select_column(tape, probs, 1),
                                   detail::labels_tensor(labels));
}

// Cross-entropy of the domain softmax against flipped domain labels; no
// gradient blocking anywhere upstream.
inline Tensor domain_loss_reversed(Tape& tape, const Tensor& features, const DomainHead& head,
                                   const std::vector<int>& true_domains) {
  if (static_cast<long>(true_domains.size()) != features.rows())
    throw ShapeError("domain count does not match batch of " + std::to_string(features.rows()));
  bool mixed = false;
  for (int d : true_domains) {
    if (d != 0 && d != 1) throw ValueError("domain labels must be 0 (source) or 1 (target)");
    mixed = mixed || d != true_domains.front();
  }
  if (!mixed)
    std::cerr << "[gast] note: single-domain batch in domain_loss_reversed; "
                 "confusion pressure degenerates\n";
  std::vector<int> flipped(true_domains.size());
  for (size_t i = 0; i < true_domains.size(); ++i) flipped[i] = 1 - true_domains[i];
  Tensor probs = head_probs(tape, features, head);
  return ops::binary_cross_entropy(tape, ops::select_column(tape, probs, 1),
                                   detail::labels_tensor(flipped));
}

// Mean Shannon entropy of predicted sentiment distributions over an
// unlabeled batch; in [0, ln 2] for two classes.
inline Tensor ssl_entropy_loss(Tape& tape, const Tensor& features, const SentimentHead& head,
                               const std::vector<int>& labels) {
  if (static_cast<long>(labels.size()) != features.rows())
    throw ShapeError("label count does not match batch of " + std::to_string(features.rows()));
  for (int y : labels)
    if (y != -1) throw ValueError("ssl_entropy_loss batch contains a labeled sample");
  Tensor probs = head_probs(tape, features, head);
  Tensor plogp = ops::mul(tape, probs, ops::log_clamped(tape, probs));
  return ops::scale(tape, ops::sum_all(tape, plogp), -1.0 / static_cast<double>(features.rows()));
}

// L = lambda_c L_c + lambda_d L_d + lambda_a L_a
inline Tensor total_loss(Tape& tape, const Tensor& loss_c, const Tensor& loss_d, const Tensor& loss_a,
                         const LossWeights& w) {
  return ops::add(tape, ops::add(tape, ops::scale(tape, loss_c, w.lambda_c),
                                 ops::scale(tape, loss_d, w.lambda_d)),
                  ops::scale(tape, loss_a, w.lambda_a));
}

// Gradient reversal: identity forward; backward multiplies the incoming
// gradient by -lambda before it reaches upstream tensors.
inline Tensor grl(Tape& tape, const Tensor& x, double lambda) {
  Tensor out = Tensor::from_data(x.shape(), x.data(), x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out, lambda]() mutable {
      if (!out.has_grad()) return;
      auto& gx = x.ensure_grad();
      const auto& g = out.grad();
      for (size_t i = 0; i < g.size(); ++i) gx[i] += -lambda * g[i];
    });
  }
  return out;
}

// Classical adversarial alternative: cross-entropy against TRUE domain
// labels computed behind a gradient-reversal layer. The discriminator sees
// ordinary gradients; the encoder sees them negated.
inline Tensor grl_domain_loss(Tape& tape, const Tensor& features, const DomainHead& head,
                              const std::vector<int>& true_domains, double lambda) {
  if (static_cast<long>(true_domains.size()) != features.rows())
    throw ShapeError("domain count does not match batch of " + std::to_string(features.rows()));
  bool mixed = false;
  for (int d : true_domains) {
    if (d != 0 && d != 1) throw ValueError("domain labels must be 0 (source) or 1 (target)");
    mixed = mixed || d != true_domains.front();
  }
  if (!mixed)
    std::cerr << "[gast] note: single-domain batch in grl_domain_loss\n";
  Tensor probs = head_probs(tape, grl(tape, features, lambda), head);
  return ops::binary_cross_entropy(tape, ops::select_column(tape, probs, 1),
                                   detail::labels_tensor(true_domains));
}

}  // namespace gast
