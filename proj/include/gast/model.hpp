#pragma once

#include <span>
#include <string>
#include <vector>

#include "gast/adapt.hpp"
#include "gast/batch.hpp"
#include "gast/embeddings.hpp"
#include "gast/hgat.hpp"
#include "gast/pos_transformer.hpp"

namespace gast {

enum class Ablation { none, non_pos, non_hgat, non_ids, non_agg, non_act };
enum class Strategy { ids, grl };

inline const char* to_string(Ablation a) {
  switch (a) {
    case Ablation::none: return "none";
    case Ablation::non_pos: return "non_pos";
    case Ablation::non_hgat: return "non_hgat";
    case Ablation::non_ids: return "non_ids";
    case Ablation::non_agg: return "non_agg";
    case Ablation::non_act: return "non_act";
  }
  return "?";
}

inline Ablation ablation_from(const std::string& s) {
  if (s == "none") return Ablation::none;
  if (s == "non_pos") return Ablation::non_pos;
  if (s == "non_hgat") return Ablation::non_hgat;
  if (s == "non_ids") return Ablation::non_ids;
  if (s == "non_agg") return Ablation::non_agg;
  if (s == "non_act") return Ablation::non_act;
  throw ConfigError("unknown ablation: " + s);
}

struct ModelConfig {
  int d = 300;        // word-embedding width
  int d_model = 256;  // sequence feature width
  int pos_heads = 8;
  int pos_layers = 1;
  int ffn_hidden = 0;  // 0 -> 2 * d_model
  int d_t = 30;
  int d_r = 30;
  int hgat_layers = 2;
  int hgat_heads = 3;
  int d_head = 32;
  int hgat_d_in = 0;  // 0 -> d_model; otherwise a linear adapter bridges
  double leaky_slope = 0.2;
  double dropout = 0.25;
  bool residual = false;
  bool layer_norm = false;
  Ablation ablation = Ablation::none;

  PosTransformerConfig pos_config() const {
    PosTransformerConfig c;
    c.d = d;
    c.d_model = d_model;
    c.heads = pos_heads;
    c.d_t = d_t;
    c.ffn_hidden = ffn_hidden;
    c.layers = pos_layers;
    c.dropout_p = dropout;
    c.use_tags = ablation != Ablation::non_pos;
    c.residual = residual;
    c.layer_norm = layer_norm;
    return c;
  }

  bool uses_hgat() const { return ablation != Ablation::non_hgat; }

  HgatConfig hgat_config() const {
    HgatConfig c;
    c.layers = hgat_layers;
    c.heads = hgat_heads;
    c.d_in = hgat_d_in > 0 ? hgat_d_in : d_model;
    c.d_head = d_head;
    c.d_r = d_r;
    c.leaky_slope = leaky_slope;
    c.dropout_p = dropout;
    c.aggregate_branch = ablation != Ablation::non_agg;
    c.activation_branch = ablation != Ablation::non_act;
    return c;
  }

  // Width of the pooled sentence representation fed to both heads.
  int feature_width() const { return uses_hgat() ? hgat_config().out_width() : d_model; }

  void validate() const {
    pos_config().validate();
    if (uses_hgat()) hgat_config().validate();
  }
};

// Full encoder plus both classifier heads. Parameter registration order is
// fixed, which makes checkpoints and gradient checks deterministic.
class GastModel {
 public:
  GastModel(const ModelConfig& cfg, const Vocab& words, const Vocab& tags, const Vocab& relations,
            Rng& rng, const Tensor* pretrained_words = nullptr)
      : cfg_(cfg), words_(&words), tags_(&tags), relations_(&relations) {
    cfg_.validate();
    tables_ = init_embeddings(words, tags, relations, cfg_.d, cfg_.d_t, cfg_.d_r, rng);
    if (pretrained_words) {
      if (pretrained_words->rows() != words.size() || pretrained_words->cols() != cfg_.d)
        throw ShapeError("pretrained word table " + shape_str(pretrained_words->shape()) +
                         " does not match vocab/width");
      tables_.word = *pretrained_words;
      tables_.word.set_requires_grad(true);
    }
    pos_ = PosTransformerParams::init(cfg_.pos_config(), rng);
    if (cfg_.uses_hgat()) {
      const HgatConfig hc = cfg_.hgat_config();
      if (hc.d_in != cfg_.d_model) adapter_ = Tensor::xavier(cfg_.d_model, hc.d_in, rng);
      hgat_ = HgatParams::init(hc, rng);
    }
    sentiment_ = SentimentHead::init(cfg_.feature_width(), rng);
    domain_ = DomainHead::init(cfg_.feature_width(), rng);

    params_.add("emb.word", tables_.word);
    if (cfg_.pos_config().use_tags) params_.add("emb.tag", tables_.tag);
    if (cfg_.uses_hgat()) params_.add("emb.relation", tables_.relation);
    pos_.register_into(params_, "pos");
    if (adapter_.defined()) params_.add("hgat.adapter", adapter_);
    if (cfg_.uses_hgat()) hgat_.register_into(params_, "hgat");
    sentiment_.register_into(params_, "head.sentiment");
    domain_.register_into(params_, "head.domain");
  }

  const ModelConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const EmbeddingTables& tables() const { return tables_; }
  const SentimentHead& sentiment_head() const { return sentiment_; }
  const DomainHead& domain_head() const { return domain_; }

  // 1 x feature_width pooled representation of one sentence.
  Tensor encode_sentence(Tape& tape, const SyntacticSentence& s, bool train, Rng& rng,
                         AttnTrace* trace = nullptr) const {
    if (s.size() < 1) throw ValueError("cannot encode an empty sentence");
    std::vector<int> word_ids(static_cast<size_t>(s.size()));
    std::vector<int> tag_ids(static_cast<size_t>(s.size()));
    for (int i = 0; i < s.size(); ++i) {
      word_ids[static_cast<size_t>(i)] = words_->lookup(to_lower(s.tokens[static_cast<size_t>(i)].form));
      tag_ids[static_cast<size_t>(i)] = tags_->lookup(s.tokens[static_cast<size_t>(i)].pos_tag);
    }
    Tensor E = ops::gather_rows(tape, tables_.word, word_ids);
    Tensor tags = cfg_.pos_config().use_tags ? ops::gather_rows(tape, tables_.tag, tag_ids) : Tensor::zeros({s.size(), cfg_.d_t});
    Tensor seq = pos_transformer_forward(tape, E, tags, pos_, cfg_.pos_config(), train, rng, trace);
    Tensor pooled;
    if (cfg_.uses_hgat()) {
      Tensor h = adapter_.defined() ? ops::matmul(tape, seq, adapter_) : seq;
      h = hgat_forward(tape, h, s, tables_.relation, hgat_, cfg_.hgat_config(), train, rng, trace);
      pooled = sentence_pool(tape, h);
    } else {
      pooled = sentence_pool(tape, seq);
    }
    return ops::reshape(tape, pooled, {1, cfg_.feature_width()});
  }

  // batch_size x feature_width matrix, one pooled row per sentence.
  Tensor encode_batch(Tape& tape, std::span<const SyntacticSentence* const> batch, bool train,
                      Rng& rng, AttnTrace* trace = nullptr) const {
    if (batch.empty()) throw ValueError("cannot encode an empty batch");
    std::vector<Tensor> rows;
    rows.reserve(batch.size());
    for (const auto* s : batch) rows.push_back(encode_sentence(tape, *s, train, rng, trace));
    return rows.size() == 1 ? rows[0] : ops::concat_rows(tape, std::span<const Tensor>(rows));
  }

  // argmax sentiment predictions, eval mode.
  std::vector<int> predict(std::span<const SyntacticSentence* const> batch, Rng& rng) const {
    Tape tape;
    Tensor feats = encode_batch(tape, batch, /*train=*/false, rng);
    Tensor probs = head_probs(tape, feats, sentiment_);
    std::vector<int> out(batch.size());
    for (size_t i = 0; i < batch.size(); ++i)
      out[i] = probs.at(static_cast<int>(i), 1) > probs.at(static_cast<int>(i), 0) ? 1 : 0;
    return out;
  }

 private:
  ModelConfig cfg_;
  const Vocab* words_;
  const Vocab* tags_;
  const Vocab* relations_;
  EmbeddingTables tables_;
  PosTransformerParams pos_;
  Tensor adapter_;
  HgatParams hgat_;
  SentimentHead sentiment_;
  DomainHead domain_;
  ParamSet params_;
};

}  // namespace gast
