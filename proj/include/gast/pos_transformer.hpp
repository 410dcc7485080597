#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gast/adam.hpp"
#include "gast/attn_trace.hpp"
#include "gast/ops.hpp"

// Sequence encoder: multi-head scaled dot-product attention where each head
// adds a second attention over POS-tag projections (reusing the word value
// matrix), followed by a two-layer ReLU feed-forward block.

namespace gast {

struct PosTransformerConfig {
  int d = 300;         // raw word-embedding width
  int d_model = 256;   // internal width; d_model % heads == 0
  int heads = 8;       // I
  int d_t = 30;        // tag-embedding width
  int ffn_hidden = 0;  // 0 means 2 * d_model
  int layers = 1;
  double dropout_p = 0.25;
  bool use_tags = true;  // false gives the vanilla transformer path
  bool residual = false;
  bool layer_norm = false;

  int head_width() const { return d_model / heads; }
  int ffn_width() const { return ffn_hidden > 0 ? ffn_hidden : 2 * d_model; }

  void validate() const {
    if (heads < 1) throw ConfigError("attention needs at least one head");
    if (d_model % heads != 0)
      throw ConfigError("d_model " + std::to_string(d_model) + " is not divisible by " +
                        std::to_string(heads) + " heads");
    if (d < 1 || d_t < 1) throw ConfigError("embedding widths must be positive");
    if (dropout_p < 0.0 || dropout_p >= 1.0) throw ConfigError("dropout must be in [0, 1)");
    if (layers < 1) throw ConfigError("at least one encoder layer required");
  }
};

struct PosHeadParams {
  Tensor w_q, w_k, w_v;   // d_model x head_width
  Tensor w_qt, w_kt;      // d_t x head_width (tag projections, absent when use_tags is off)
};

struct PosLayerParams {
  std::vector<PosHeadParams> heads;
  Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;
  Tensor ln1_gamma, ln1_beta, ln2_gamma, ln2_beta;  // only when layer_norm
};

struct PosTransformerParams {
  Tensor w_in;  // d x d_model input projection
  std::vector<PosLayerParams> layers;

  static PosTransformerParams init(const PosTransformerConfig& cfg, Rng& rng) {
    cfg.validate();
    PosTransformerParams p;
    p.w_in = Tensor::xavier(cfg.d, cfg.d_model, rng);
    const int dh = cfg.head_width();
    for (int l = 0; l < cfg.layers; ++l) {
      PosLayerParams lp;
      for (int k = 0; k < cfg.heads; ++k) {
        PosHeadParams hp;
        hp.w_q = Tensor::xavier(cfg.d_model, dh, rng);
        hp.w_k = Tensor::xavier(cfg.d_model, dh, rng);
        hp.w_v = Tensor::xavier(cfg.d_model, dh, rng);
        if (cfg.use_tags) {
          hp.w_qt = Tensor::xavier(cfg.d_t, dh, rng);
          hp.w_kt = Tensor::xavier(cfg.d_t, dh, rng);
        }
        lp.heads.push_back(std::move(hp));
      }
      lp.ffn_w1 = Tensor::xavier(cfg.d_model, cfg.ffn_width(), rng);
      lp.ffn_b1 = Tensor::zeros({cfg.ffn_width()}, true);
      lp.ffn_w2 = Tensor::xavier(cfg.ffn_width(), cfg.d_model, rng);
      lp.ffn_b2 = Tensor::zeros({cfg.d_model}, true);
      if (cfg.layer_norm) {
        lp.ln1_gamma = Tensor::full({cfg.d_model}, 1.0, true);
        lp.ln1_beta = Tensor::zeros({cfg.d_model}, true);
        lp.ln2_gamma = Tensor::full({cfg.d_model}, 1.0, true);
        lp.ln2_beta = Tensor::zeros({cfg.d_model}, true);
      }
      p.layers.push_back(std::move(lp));
    }
    return p;
  }

  void register_into(ParamSet& params, const std::string& prefix) const {
    params.add(prefix + ".w_in", w_in);
    for (size_t l = 0; l < layers.size(); ++l) {
      const auto& lp = layers[l];
      const std::string lpfx = prefix + ".l" + std::to_string(l);
      for (size_t k = 0; k < lp.heads.size(); ++k) {
        const auto& hp = lp.heads[k];
        const std::string hpfx = lpfx + ".h" + std::to_string(k);
        params.add(hpfx + ".w_q", hp.w_q);
        params.add(hpfx + ".w_k", hp.w_k);
        params.add(hpfx + ".w_v", hp.w_v);
        if (hp.w_qt.defined()) {
          params.add(hpfx + ".w_qt", hp.w_qt);
          params.add(hpfx + ".w_kt", hp.w_kt);
        }
      }
      params.add(lpfx + ".ffn_w1", lp.ffn_w1);
      params.add(lpfx + ".ffn_b1", lp.ffn_b1);
      params.add(lpfx + ".ffn_w2", lp.ffn_w2);
      params.add(lpfx + ".ffn_b2", lp.ffn_b2);
      if (lp.ln1_gamma.defined()) {
        params.add(lpfx + ".ln1_gamma", lp.ln1_gamma);
        params.add(lpfx + ".ln1_beta", lp.ln1_beta);
        params.add(lpfx + ".ln2_gamma", lp.ln2_gamma);
        params.add(lpfx + ".ln2_beta", lp.ln2_beta);
      }
    }
  }
};

// One attention head: scaled dot-product over word projections plus, when
// tags are enabled, a second scaled dot-product over tag projections that
// reuses the word values. Both use divisor sqrt(d_model / heads).
inline Tensor pos_attention_head(Tape& tape, const Tensor& h, const Tensor& tags,
                                 const PosHeadParams& hp, const PosTransformerConfig& cfg,
                                 AttnTrace* trace = nullptr, int layer = 0, int head = 0) {
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(cfg.head_width()));
  Tensor q = ops::matmul(tape, h, hp.w_q);
  Tensor k = ops::matmul(tape, h, hp.w_k);
  Tensor v = ops::matmul(tape, h, hp.w_v);
  Tensor word_probs =
      ops::softmax_rows(tape, ops::scale(tape, ops::matmul(tape, q, ops::transpose(tape, k)), inv_scale));
  if (trace) trace->push("word", layer, head, word_probs, nullptr);
  Tensor out = ops::matmul(tape, word_probs, v);
  if (cfg.use_tags) {
    Tensor qt = ops::matmul(tape, tags, hp.w_qt);
    Tensor kt = ops::matmul(tape, tags, hp.w_kt);
    Tensor tag_probs = ops::softmax_rows(
        tape, ops::scale(tape, ops::matmul(tape, qt, ops::transpose(tape, kt)), inv_scale));
    if (trace) trace->push("tag", layer, head, tag_probs, nullptr);
    out = ops::add(tape, out, ops::matmul(tape, tag_probs, v));
  }
  return out;
}

// E: n x d raw word embeddings, tags: n x d_t tag embeddings.
// Returns n x d_model sequence features.
inline Tensor pos_transformer_forward(Tape& tape, const Tensor& E, const Tensor& tags,
                                      const PosTransformerParams& p, const PosTransformerConfig& cfg,
                                      bool train, Rng& rng, AttnTrace* trace = nullptr) {
  if (cfg.use_tags && E.rows() != tags.rows())
    throw ShapeError("word and tag row counts disagree: " + shape_str(E.shape()) + " vs " +
                     shape_str(tags.shape()));
  Tensor h = ops::matmul(tape, E, p.w_in);
  for (size_t l = 0; l < p.layers.size(); ++l) {
    const auto& lp = p.layers[l];
    std::vector<Tensor> head_outs;
    head_outs.reserve(lp.heads.size());
    for (size_t k = 0; k < lp.heads.size(); ++k)
      head_outs.push_back(
          pos_attention_head(tape, h, tags, lp.heads[k], cfg, trace, static_cast<int>(l), static_cast<int>(k)));
    Tensor z = ops::concat_last_dim(tape, std::span<const Tensor>(head_outs));
    if (cfg.residual) z = ops::add(tape, z, h);
    if (cfg.layer_norm) z = ops::layer_norm(tape, z, lp.ln1_gamma, lp.ln1_beta);
    Tensor f = ops::add_rows(tape, ops::matmul(tape, z, lp.ffn_w1), lp.ffn_b1);
    f = ops::relu(tape, f);
    f = ops::add_rows(tape, ops::matmul(tape, f, lp.ffn_w2), lp.ffn_b2);
    if (cfg.residual) f = ops::add(tape, f, z);
    if (cfg.layer_norm) f = ops::layer_norm(tape, f, lp.ln2_gamma, lp.ln2_beta);
    h = ops::dropout(tape, f, cfg.dropout_p, train, rng);
  }
  return h;
}

}  // namespace gast
