#pragma once

#include <string>
#include <vector>

#include "gast/corpus.hpp"

namespace gast {

// Review sentences split by role: labeled source for the classifier loss,
// unlabeled source/target for the adaptive losses, held-out labeled source
// for validation and labeled target for testing.
struct DatasetSplits {
  std::vector<SyntacticSentence> source_labeled;
  std::vector<SyntacticSentence> source_unlabeled;
  std::vector<SyntacticSentence> target_unlabeled;
  std::vector<SyntacticSentence> validation;  // labeled, source domain
  std::vector<SyntacticSentence> test;        // labeled, target domain
};

// Two-domain synthetic review generator. Both domains share the same
// syntax templates (copular sentences with optional attributive decoy
// adjective and optional advmod modifier) and the same sentiment lexicons;
// only the noun vocabulary is domain-specific. The label is decided by the
// predicate adjective and flips iff its advmod child is a negation word.
// The decoy adjective always carries the opposite polarity of the
// predicate, so a sentence pair that swaps the two adjectives has identical
// word content but opposite labels: word order alone cannot resolve it,
// the syntactic graph can.
struct SynthSpec {
  int n_labeled = 500;
  int n_unlabeled_source = 1000;
  int n_unlabeled_target = 1000;
  int n_validation = 200;
  int n_test = 500;
  uint64_t seed = 9001;

  std::string domain_source = "books";
  std::string domain_target = "electronics";
  std::vector<std::string> nouns_source = {"book",   "story", "novel",  "author",
                                           "plot",   "essay", "chapter", "ending"};
  std::vector<std::string> nouns_target = {"camera", "battery", "lens",    "screen",
                                           "device", "charger", "speaker", "remote"};
  std::vector<std::string> positive_words = {"great",    "excellent", "wonderful", "superb",
                                             "amazing",  "brilliant", "delightful", "fantastic"};
  std::vector<std::string> negative_words = {"terrible", "awful",    "boring",   "dreadful",
                                             "horrible", "mediocre", "lousy",    "disappointing"};
  std::vector<std::string> negation_words = {"not", "never", "hardly"};
  std::vector<std::string> adverbs = {"really", "quite", "truly"};
  std::vector<std::string> verbs = {"was", "is"};

  // Quantized to tenths: structures repeat over a fixed cycle of 10, so
  // relation statistics are exact whenever split sizes are multiples of 10.
  double decoy_fraction = 0.3;
  double negator_fraction = 0.3;
  double adverb_fraction = 0.2;
};

namespace detail {

struct SentenceStructure {
  bool decoy = false;
  bool negated = false;
  bool adverb = false;
};

// Evenly spreads round(f*10) marks over a cycle of 10 slots.
inline bool pattern_slot(int index, double fraction, int phase) {
  const int marks = static_cast<int>(fraction * 10.0 + 0.5);
  const int slot = (index + phase) % 10;
  return (slot * marks) / 10 != ((slot + 1) * marks) / 10;
}

inline SentenceStructure structure_for(int index, const SynthSpec& spec) {
  SentenceStructure s;
  s.negated = pattern_slot(index, spec.negator_fraction, 0);
  s.decoy = pattern_slot(index, spec.decoy_fraction, 3);
  s.adverb = !s.negated && pattern_slot(index, spec.adverb_fraction, 6);
  return s;
}

inline SyntacticSentence make_sentence(const SynthSpec& spec, const std::string& domain,
                                       const std::vector<std::string>& nouns, int label,
                                       const SentenceStructure& st, Rng& rng, Vocab& relations) {
  const int pol = st.negated ? 1 - label : label;  // predicate adjective polarity
  const auto& lex = pol == 1 ? spec.positive_words : spec.negative_words;
  const auto& decoy_lex = pol == 1 ? spec.negative_words : spec.positive_words;

  SyntacticSentence s;
  s.domain = domain;
  s.label = label;
  auto push = [&s](std::string form, std::string pos, std::string deprel) {
    Token t;
    t.form = std::move(form);
    t.pos_tag = std::move(pos);
    t.deprel = std::move(deprel);
    s.tokens.push_back(std::move(t));
    return static_cast<int>(s.tokens.size()) - 1;
  };

  const int i_the = push("the", "DT", "det");
  int i_decoy = -1;
  if (st.decoy) i_decoy = push(rng.pick(decoy_lex), "JJ", "amod");
  const int i_noun = push(rng.pick(nouns), "NN", "nsubj");
  const int i_verb = push(rng.pick(spec.verbs), "VBD", "cop");
  int i_mod = -1;
  if (st.negated)
    i_mod = push(rng.pick(spec.negation_words), "RB", "advmod");
  else if (st.adverb)
    i_mod = push(rng.pick(spec.adverbs), "RB", "advmod");
  const int i_pred = push(rng.pick(lex), "JJ", "root");

  s.tokens[static_cast<size_t>(i_the)].head = i_noun;
  if (i_decoy >= 0) s.tokens[static_cast<size_t>(i_decoy)].head = i_noun;
  s.tokens[static_cast<size_t>(i_noun)].head = i_pred;
  s.tokens[static_cast<size_t>(i_verb)].head = i_pred;
  if (i_mod >= 0) s.tokens[static_cast<size_t>(i_mod)].head = i_pred;
  s.tokens[static_cast<size_t>(i_pred)].head = Token::kRoot;

  build_graph(s, relations);
  return s;
}

inline std::vector<SyntacticSentence> make_split(const SynthSpec& spec, const std::string& domain,
                                                 const std::vector<std::string>& nouns, int count,
                                                 bool keep_labels, uint64_t stream, Vocab& relations) {
  Rng rng = Rng::from(spec.seed, stream);
  std::vector<SyntacticSentence> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    // Balanced labels, decorrelated from the length-10 structure cycle:
    // over 20 sentences each structure slot carries each label once.
    const int label = (i + i / 10) % 2;
    auto st = structure_for(i, spec);
    SyntacticSentence s = make_sentence(spec, domain, nouns, label, st, rng, relations);
    if (!keep_labels) s.label = SyntacticSentence::kUnlabeled;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

inline void validate(const SynthSpec& spec) {
  if (spec.domain_source.empty() || spec.domain_target.empty() ||
      spec.domain_source == spec.domain_target)
    throw ConfigError("synthetic corpus needs 2 distinct domain names");
  if (spec.nouns_source.empty() || spec.nouns_target.empty())
    throw ConfigError("synthetic corpus noun lists must be nonempty");
  if (spec.positive_words.empty() || spec.negative_words.empty())
    throw ConfigError("synthetic corpus sentiment lexicons must be nonempty");
  if (spec.negator_fraction > 0 && spec.negation_words.empty())
    throw ConfigError("negator templates enabled but negation word list is empty");
  for (double f : {spec.decoy_fraction, spec.negator_fraction, spec.adverb_fraction})
    if (f < 0.0 || f > 1.0) throw ConfigError("template fractions must be in [0, 1]");
  if (spec.n_labeled < 2) throw ConfigError("labeled split needs at least 2 sentences");
}

inline DatasetSplits synth_corpus(const SynthSpec& spec, Vocab& relations) {
  validate(spec);
  DatasetSplits d;
  d.source_labeled = detail::make_split(spec, spec.domain_source, spec.nouns_source,
                                        spec.n_labeled, true, 1, relations);
  d.source_unlabeled = detail::make_split(spec, spec.domain_source, spec.nouns_source,
                                          spec.n_unlabeled_source, false, 2, relations);
  d.target_unlabeled = detail::make_split(spec, spec.domain_target, spec.nouns_target,
                                          spec.n_unlabeled_target, false, 3, relations);
  d.validation = detail::make_split(spec, spec.domain_source, spec.nouns_source,
                                    spec.n_validation, true, 4, relations);
  d.test = detail::make_split(spec, spec.domain_target, spec.nouns_target, spec.n_test, true, 5,
                              relations);
  return d;
}

}  // namespace gast
