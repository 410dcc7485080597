#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gast/adam.hpp"
#include "gast/attn_trace.hpp"
#include "gast/corpus.hpp"
#include "gast/ops.hpp"

// Hybrid graph attention over the syntactic graph. Each layer runs two
// masked-attention functions per head and concatenates their outputs:
//  - relation-aggregate: additive scores over [W h_i || W h_j || W_r r_ij]
//    through LeakyReLU, then a weighted sum of transformed neighbors;
//  - relation-activation: scaled dot-product scores (W_Q h_i) against
//    (W_K h_j + W_Kr r_ij), values (W_V h_j + W_Vr r_ij).
// Neighborhoods come from the sentence adjacency, which includes self-loops
// carrying the reserved SELF relation.

namespace gast {

struct HgatConfig {
  int layers = 2;
  int heads = 3;   // attention heads per function
  int d_in = 256;  // layer-0 input width (sequence feature width)
  int d_head = 32;
  int d_r = 30;    // relation-embedding width
  double leaky_slope = 0.2;
  double dropout_p = 0.25;
  bool aggregate_branch = true;
  bool activation_branch = true;

  int branch_width() const { return heads * d_head; }
  int out_width() const {
    return ((aggregate_branch ? 1 : 0) + (activation_branch ? 1 : 0)) * branch_width();
  }
  int layer_input_width(int layer) const { return layer == 0 ? d_in : out_width(); }

  void validate() const {
    if (heads < 1) throw ConfigError("graph attention needs at least one head");
    if (layers < 1) throw ConfigError("graph attention needs at least one layer");
    if (d_in < 1 || d_head < 1 || d_r < 1) throw ConfigError("graph attention widths must be positive");
    if (!aggregate_branch && !activation_branch)
      throw ConfigError("at least one graph-attention branch must stay enabled");
    if (dropout_p < 0.0 || dropout_p >= 1.0) throw ConfigError("dropout must be in [0, 1)");
  }
};

struct HgatHeadParams {
  // aggregate branch
  Tensor w;    // d_in x d_head
  Tensor w_r;  // d_r x d_head, relation transform for the additive score
  Tensor a;    // 3 * d_head attention vector
  // activation branch
  Tensor w_q, w_k, w_v;  // d_in x d_head
};

struct HgatLayerParams {
  std::vector<HgatHeadParams> heads;
  Tensor w_kr, w_vr;  // d_r x d_head, shared across the layer's heads
};

struct HgatParams {
  std::vector<HgatLayerParams> layers;

  static HgatParams init(const HgatConfig& cfg, Rng& rng) {
    cfg.validate();
    HgatParams p;
    for (int l = 0; l < cfg.layers; ++l) {
      const int d_in = cfg.layer_input_width(l);
      HgatLayerParams lp;
      for (int k = 0; k < cfg.heads; ++k) {
        HgatHeadParams hp;
        if (cfg.aggregate_branch) {
          hp.w = Tensor::xavier(d_in, cfg.d_head, rng);
          hp.w_r = Tensor::xavier(cfg.d_r, cfg.d_head, rng);
          hp.a = Tensor::uniform({3 * cfg.d_head}, -0.1, 0.1, rng, true);
        }
        if (cfg.activation_branch) {
          hp.w_q = Tensor::xavier(d_in, cfg.d_head, rng);
          hp.w_k = Tensor::xavier(d_in, cfg.d_head, rng);
          hp.w_v = Tensor::xavier(d_in, cfg.d_head, rng);
        }
        lp.heads.push_back(std::move(hp));
      }
      if (cfg.activation_branch) {
        lp.w_kr = Tensor::xavier(cfg.d_r, cfg.d_head, rng);
        lp.w_vr = Tensor::xavier(cfg.d_r, cfg.d_head, rng);
      }
      p.layers.push_back(std::move(lp));
    }
    return p;
  }

  void register_into(ParamSet& params, const std::string& prefix) const {
    for (size_t l = 0; l < layers.size(); ++l) {
      const auto& lp = layers[l];
      const std::string lpfx = prefix + ".l" + std::to_string(l);
      for (size_t k = 0; k < lp.heads.size(); ++k) {
        const auto& hp = lp.heads[k];
        const std::string hpfx = lpfx + ".h" + std::to_string(k);
        if (hp.w.defined()) {
          params.add(hpfx + ".w", hp.w);
          params.add(hpfx + ".w_r", hp.w_r);
          params.add(hpfx + ".a", hp.a);
        }
        if (hp.w_q.defined()) {
          params.add(hpfx + ".w_q", hp.w_q);
          params.add(hpfx + ".w_k", hp.w_k);
          params.add(hpfx + ".w_v", hp.w_v);
        }
      }
      if (lp.w_kr.defined()) {
        params.add(lpfx + ".w_kr", lp.w_kr);
        params.add(lpfx + ".w_vr", lp.w_vr);
      }
    }
  }
};

namespace detail {
// relation_ids with the off-support sentinel replaced by PAD, safe for
// dense lookups; masked softmax zeroes those positions anyway.
inline IntMatrix dense_relation_ids(const SyntacticSentence& s) {
  IntMatrix ids = s.relation_ids;
  for (auto& v : ids.v)
    if (v < 0) v = Vocab::kPad;
  return ids;
}
}  // namespace detail

// Additive-score branch. Returns n x (heads * d_head).
inline Tensor relation_aggregate(Tape& tape, const Tensor& h, const SyntacticSentence& graph,
                                 const Tensor& rel_table, const HgatLayerParams& lp,
                                 const HgatConfig& cfg, AttnTrace* trace = nullptr, int layer = 0) {
  if (h.rows() != graph.size())
    throw ShapeError("node features " + shape_str(h.shape()) + " do not match graph of " +
                     std::to_string(graph.size()) + " nodes");
  const IntMatrix ids = detail::dense_relation_ids(graph);
  const int dh = cfg.d_head;
  std::vector<Tensor> head_outs;
  head_outs.reserve(lp.heads.size());
  for (size_t k = 0; k < lp.heads.size(); ++k) {
    const auto& hp = lp.heads[k];
    Tensor wh = ops::matmul(tape, h, hp.w);
    Tensor a_i = ops::slice_flat(tape, hp.a, 0, {dh, 1});
    Tensor a_j = ops::slice_flat(tape, hp.a, dh, {dh, 1});
    Tensor a_r = ops::slice_flat(tape, hp.a, 2 * dh, {dh, 1});
    Tensor u = ops::matmul(tape, wh, a_i);  // n x 1
    Tensor v = ops::matmul(tape, wh, a_j);  // n x 1
    // per-relation additive term, gathered over the pair index matrix
    Tensor rel_proj = ops::matmul(tape, rel_table, hp.w_r);        // |V_r| x d_head
    Tensor rel_score = ops::matmul(tape, rel_proj, a_r);           // |V_r| x 1
    Tensor t = ops::reshape(tape, rel_score, {rel_table.rows()});  // |V_r|
    Tensor scores = ops::add(tape, ops::outer_sum(tape, u, v), ops::pair_lookup(tape, t, ids));
    Tensor f = ops::leaky_relu(tape, scores, cfg.leaky_slope);
    Tensor alpha = ops::softmax_rows(tape, f, &graph.adjacency);
    if (trace) trace->push("agg", layer, static_cast<int>(k), alpha, &graph.adjacency);
    head_outs.push_back(ops::leaky_relu(tape, ops::matmul(tape, alpha, wh), cfg.leaky_slope));
  }
  return ops::concat_last_dim(tape, std::span<const Tensor>(head_outs));
}

// Scaled dot-product branch with relation-shifted keys and values.
inline Tensor relation_activation(Tape& tape, const Tensor& h, const SyntacticSentence& graph,
                                  const Tensor& rel_table, const HgatLayerParams& lp,
                                  const HgatConfig& cfg, AttnTrace* trace = nullptr, int layer = 0) {
  if (h.rows() != graph.size())
    throw ShapeError("node features " + shape_str(h.shape()) + " do not match graph of " +
                     std::to_string(graph.size()) + " nodes");
  const IntMatrix ids = detail::dense_relation_ids(graph);
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_head));
  Tensor key_rel = ops::matmul(tape, rel_table, lp.w_kr);    // |V_r| x d_head
  Tensor value_rel = ops::matmul(tape, rel_table, lp.w_vr);  // |V_r| x d_head
  std::vector<Tensor> head_outs;
  head_outs.reserve(lp.heads.size());
  for (size_t k = 0; k < lp.heads.size(); ++k) {
    const auto& hp = lp.heads[k];
    Tensor q = ops::matmul(tape, h, hp.w_q);
    Tensor key = ops::matmul(tape, h, hp.w_k);
    Tensor val = ops::matmul(tape, h, hp.w_v);
    // (W_Q h_i) . (W_K h_j + W_Kr r_ij) = (Q K^T)_ij + (Q KrT^T)_{i, rel(i,j)}
    Tensor node_scores = ops::matmul(tape, q, ops::transpose(tape, key));  // n x n
    Tensor rel_scores = ops::rowwise_lookup(tape, ops::matmul(tape, q, ops::transpose(tape, key_rel)), ids);
    Tensor f = ops::scale(tape, ops::add(tape, node_scores, rel_scores), inv_scale);
    Tensor beta = ops::softmax_rows(tape, f, &graph.adjacency);
    if (trace) trace->push("act", layer, static_cast<int>(k), beta, &graph.adjacency);
    // sum_j beta_ij (W_V h_j + W_Vr r_ij)
    Tensor node_vals = ops::matmul(tape, beta, val);
    Tensor rel_weights = ops::scatter_by_ids(tape, beta, ids, rel_table.rows());  // n x |V_r|
    Tensor rel_vals = ops::matmul(tape, rel_weights, value_rel);
    head_outs.push_back(
        ops::leaky_relu(tape, ops::add(tape, node_vals, rel_vals), cfg.leaky_slope));
  }
  return ops::concat_last_dim(tape, std::span<const Tensor>(head_outs));
}

// One full layer: enabled branches concatenated, dropout in training mode.
inline Tensor hgat_layer(Tape& tape, const Tensor& h, const SyntacticSentence& graph,
                         const Tensor& rel_table, const HgatLayerParams& lp, const HgatConfig& cfg,
                         bool train, Rng& rng, AttnTrace* trace = nullptr, int layer = 0) {
  std::vector<Tensor> branches;
  if (cfg.aggregate_branch)
    branches.push_back(relation_aggregate(tape, h, graph, rel_table, lp, cfg, trace, layer));
  if (cfg.activation_branch)
    branches.push_back(relation_activation(tape, h, graph, rel_table, lp, cfg, trace, layer));
  Tensor out = branches.size() == 1 ? branches[0]
                                    : ops::concat_last_dim(tape, std::span<const Tensor>(branches));
  return ops::dropout(tape, out, cfg.dropout_p, train, rng);
}

inline Tensor hgat_forward(Tape& tape, Tensor h, const SyntacticSentence& graph,
                           const Tensor& rel_table, const HgatParams& p, const HgatConfig& cfg,
                           bool train, Rng& rng, AttnTrace* trace = nullptr) {
  for (size_t l = 0; l < p.layers.size(); ++l)
    h = hgat_layer(tape, h, graph, rel_table, p.layers[l], cfg, train, rng, trace, static_cast<int>(l));
  return h;
}

// Sentence representation: arithmetic mean over word rows.
inline Tensor sentence_pool(Tape& tape, const Tensor& h) {
  if (h.rows() < 1) throw ValueError("sentence_pool on an empty sentence");
  return ops::reshape(tape, ops::mean_rows(tape, h), {h.cols()});
}

}  // namespace gast
