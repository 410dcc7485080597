#pragma once

// Brute-force reference computations used by tests and the acceptance
// suite. Everything here works on raw row-major vectors with plain loops,
// independent of the tensor/op library it checks.

#include <cmath>
#include <vector>

#include "gast/corpus.hpp"
#include "gast/hgat.hpp"
#include "gast/pos_transformer.hpp"
#include "gast/synth.hpp"

namespace oracle {

using Mat = std::vector<double>;  // row-major with explicit dims

inline Mat matmul(const Mat& a, int m, int k, const Mat& b, int n) {
  Mat c(static_cast<size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i)
    for (int p = 0; p < k; ++p)
      for (int j = 0; j < n; ++j)
        c[static_cast<size_t>(i) * n + j] += a[static_cast<size_t>(i) * k + p] * b[static_cast<size_t>(p) * n + j];
  return c;
}

inline std::vector<double> row(const Mat& m, int cols, int i) {
  return std::vector<double>(m.begin() + static_cast<long>(i) * cols,
                             m.begin() + static_cast<long>(i + 1) * cols);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }

// softmax over the index set `active`, returned dense with zeros elsewhere
inline std::vector<double> masked_softmax(const std::vector<double>& scores,
                                          const std::vector<int>& active) {
  std::vector<double> out(scores.size(), 0.0);
  double mx = -1e300;
  for (int j : active) mx = std::max(mx, scores[static_cast<size_t>(j)]);
  double sum = 0.0;
  for (int j : active) sum += std::exp(scores[static_cast<size_t>(j)] - mx);
  for (int j : active) out[static_cast<size_t>(j)] = std::exp(scores[static_cast<size_t>(j)] - mx) / sum;
  return out;
}

// Plain two-softmax evaluation of one sequence-attention head: scaled
// dot-product over word projections plus tag attention reusing word values.
inline Mat pos_head(const Mat& h, int n, int dm, const Mat& tags, int dt, const gast::PosHeadParams& hp,
                    int dh, bool use_tags) {
  const Mat q = matmul(h, n, dm, hp.w_q.data(), dh);
  const Mat k = matmul(h, n, dm, hp.w_k.data(), dh);
  const Mat v = matmul(h, n, dm, hp.w_v.data(), dh);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<int> all(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) all[static_cast<size_t>(j)] = j;
  Mat out(static_cast<size_t>(n) * dh, 0.0);
  auto attend = [&](const Mat& qm, const Mat& km) {
    for (int i = 0; i < n; ++i) {
      std::vector<double> scores(static_cast<size_t>(n));
      for (int j = 0; j < n; ++j)
        scores[static_cast<size_t>(j)] = dot(row(qm, dh, i), row(km, dh, j)) * scale;
      auto p = masked_softmax(scores, all);
      for (int j = 0; j < n; ++j)
        for (int c = 0; c < dh; ++c)
          out[static_cast<size_t>(i) * dh + c] += p[static_cast<size_t>(j)] * v[static_cast<size_t>(j) * dh + c];
    }
  };
  attend(q, k);
  if (use_tags) {
    const Mat qt = matmul(tags, n, dt, hp.w_qt.data(), dh);
    const Mat kt = matmul(tags, n, dt, hp.w_kt.data(), dh);
    attend(qt, kt);
  }
  return out;
}

inline std::vector<int> neighbors(const gast::SyntacticSentence& s, int i) {
  std::vector<int> out;
  for (int j = 0; j < s.size(); ++j)
    if (s.adjacency.at(i, j)) out.push_back(j);
  return out;
}

// Per-edge direct evaluation of the additive relation-aggregate function.
inline Mat hgat_aggregate(const Mat& h, int n, int din, const gast::SyntacticSentence& s,
                          const gast::Tensor& rel_table, const gast::HgatLayerParams& lp,
                          const gast::HgatConfig& cfg) {
  const int dh = cfg.d_head, dr = cfg.d_r;
  const int width = static_cast<int>(lp.heads.size()) * dh;
  Mat out(static_cast<size_t>(n) * width, 0.0);
  for (size_t k = 0; k < lp.heads.size(); ++k) {
    const auto& hp = lp.heads[k];
    const Mat wh = matmul(h, n, din, hp.w.data(), dh);
    for (int i = 0; i < n; ++i) {
      auto nbr = neighbors(s, i);
      std::vector<double> scores(static_cast<size_t>(n), 0.0);
      for (int j : nbr) {
        const auto rel = row(rel_table.data(), dr, s.relation_ids.at(i, j));
        const auto wr = matmul(rel, 1, dr, hp.w_r.data(), dh);
        double f = 0.0;
        for (int c = 0; c < dh; ++c) {
          f += hp.a.data()[static_cast<size_t>(c)] * wh[static_cast<size_t>(i) * dh + c];
          f += hp.a.data()[static_cast<size_t>(dh + c)] * wh[static_cast<size_t>(j) * dh + c];
          f += hp.a.data()[static_cast<size_t>(2 * dh + c)] * wr[static_cast<size_t>(c)];
        }
        scores[static_cast<size_t>(j)] = leaky(f, cfg.leaky_slope);
      }
      auto alpha = masked_softmax(scores, nbr);
      for (int c = 0; c < dh; ++c) {
        double acc = 0.0;
        for (int j : nbr) acc += alpha[static_cast<size_t>(j)] * wh[static_cast<size_t>(j) * dh + c];
        out[static_cast<size_t>(i) * width + static_cast<size_t>(k) * dh + c] = leaky(acc, cfg.leaky_slope);
      }
    }
  }
  return out;
}

// Per-edge direct evaluation of the relation-activation function.
inline Mat hgat_activation(const Mat& h, int n, int din, const gast::SyntacticSentence& s,
                           const gast::Tensor& rel_table, const gast::HgatLayerParams& lp,
                           const gast::HgatConfig& cfg) {
  const int dh = cfg.d_head, dr = cfg.d_r;
  const int width = static_cast<int>(lp.heads.size()) * dh;
  Mat out(static_cast<size_t>(n) * width, 0.0);
  for (size_t k = 0; k < lp.heads.size(); ++k) {
    const auto& hp = lp.heads[k];
    const Mat q = matmul(h, n, din, hp.w_q.data(), dh);
    const Mat kk = matmul(h, n, din, hp.w_k.data(), dh);
    const Mat vv = matmul(h, n, din, hp.w_v.data(), dh);
    for (int i = 0; i < n; ++i) {
      auto nbr = neighbors(s, i);
      std::vector<double> scores(static_cast<size_t>(n), 0.0);
      for (int j : nbr) {
        const auto rel = row(rel_table.data(), dr, s.relation_ids.at(i, j));
        const auto kr = matmul(rel, 1, dr, lp.w_kr.data(), dh);
        auto key = row(kk, dh, j);
        for (int c = 0; c < dh; ++c) key[static_cast<size_t>(c)] += kr[static_cast<size_t>(c)];
        scores[static_cast<size_t>(j)] = dot(row(q, dh, i), key) / std::sqrt(static_cast<double>(dh));
      }
      auto beta = masked_softmax(scores, nbr);
      for (int c = 0; c < dh; ++c) {
        double acc = 0.0;
        for (int j : nbr) {
          const auto rel = row(rel_table.data(), dr, s.relation_ids.at(i, j));
          const auto vr = matmul(rel, 1, dr, lp.w_vr.data(), dh);
          acc += beta[static_cast<size_t>(j)] * (vv[static_cast<size_t>(j) * dh + c] + vr[static_cast<size_t>(c)]);
        }
        out[static_cast<size_t>(i) * width + static_cast<size_t>(k) * dh + c] = leaky(acc, cfg.leaky_slope);
      }
    }
  }
  return out;
}

// Random dependency tree over n nodes with relation labels drawn from the
// given vocabulary's non-reserved entries.
inline gast::SyntacticSentence random_tree(int n, gast::Vocab& relations, gast::Rng& rng) {
  using namespace gast;
  std::vector<std::string> rel_names;
  for (int i = Vocab::kSelf + 1; i < relations.size(); ++i) rel_names.push_back(relations.name(i));
  SyntacticSentence s;
  for (int i = 0; i < n; ++i) {
    Token t;
    t.form = "w" + std::to_string(i);
    t.pos_tag = i % 2 == 0 ? "NN" : "JJ";
    t.head = i == 0 ? Token::kRoot : rng.uniform_int(i);
    t.deprel = i == 0 ? "root" : rel_names[static_cast<size_t>(rng.uniform_int(static_cast<int>(rel_names.size())))];
    s.tokens.push_back(std::move(t));
  }
  build_graph(s, relations);
  return s;
}

}  // namespace oracle
