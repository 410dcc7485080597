#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "gast/corpus.hpp"
#include "gast/tensor.hpp"

namespace gast {

// Word, POS-tag and relation lookup tables. All trainable; PAD rows are
// zero and stay zero because nothing ever gathers them.
struct EmbeddingTables {
  Tensor word;      // |V_w| x d
  Tensor tag;       // |V_t| x d_t
  Tensor relation;  // |V_r| x d_r
};

namespace detail {
inline Tensor random_table(int rows, int dim, Rng& rng) {
  Tensor t = Tensor::uniform({rows, dim}, -0.1, 0.1, rng, /*requires_grad=*/true);
  for (int j = 0; j < dim; ++j) t.mutable_data()[static_cast<size_t>(Vocab::kPad) * dim + j] = 0.0;
  return t;
}
}  // namespace detail

inline EmbeddingTables init_embeddings(const Vocab& words, const Vocab& tags, const Vocab& relations,
                                       int d, int d_t, int d_r, Rng& rng) {
  if (d <= 0 || d_t <= 0 || d_r <= 0) throw ValueError("embedding dimensions must be positive");
  EmbeddingTables t;
  t.word = detail::random_table(words.size(), d, rng);
  t.tag = detail::random_table(tags.size(), d_t, rng);
  t.relation = detail::random_table(relations.size(), d_r, rng);
  return t;
}

// GloVe text format: one "word v1 ... vd" line per token. Rows for
// in-vocab words are copied from the file; everything else (including UNK)
// keeps its uniform [-0.1, 0.1] init, and PAD stays zero.
inline Tensor load_embeddings(const std::string& path, const Vocab& vocab, int dim, Rng& rng) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file: " + path);
  Tensor table = detail::random_table(vocab.size(), dim, rng);
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream iss(line);
    std::string word;
    iss >> word;
    std::vector<double> vec;
    vec.reserve(static_cast<size_t>(dim));
    double v;
    while (iss >> v) vec.push_back(v);
    if (static_cast<int>(vec.size()) != dim)
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                       " values, got " + std::to_string(vec.size()));
    if (!vocab.contains(word)) continue;
    const int id = vocab.lookup(word);
    if (id == Vocab::kPad) continue;
    for (int j = 0; j < dim; ++j)
      table.mutable_data()[static_cast<size_t>(id) * dim + j] = vec[static_cast<size_t>(j)];
  }
  return table;
}

}  // namespace gast
