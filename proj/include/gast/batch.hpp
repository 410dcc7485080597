#pragma once

#include <vector>

#include "gast/synth.hpp"

namespace gast {

enum class BatchMode { labeled, domain_mixed, unlabeled };

struct Batch {
  std::vector<const SyntacticSentence*> sentences;
  std::vector<int> labels;   // -1 where unlabeled
  std::vector<int> domains;  // 0 = source, 1 = target

  int size() const { return static_cast<int>(sentences.size()); }
};

namespace detail {

struct Item {
  const SyntacticSentence* s;
  int domain;
};

inline std::vector<Item> collect(const std::vector<SyntacticSentence>& split, int domain) {
  std::vector<Item> v;
  v.reserve(split.size());
  for (const auto& s : split) v.push_back({&s, domain});
  return v;
}

inline void append(std::vector<Item>& dst, const std::vector<SyntacticSentence>& split, int domain) {
  for (const auto& s : split) dst.push_back({&s, domain});
}

inline void push(Batch& b, const Item& it) {
  b.sentences.push_back(it.s);
  b.labels.push_back(it.s->label);
  b.domains.push_back(it.domain);
}

}  // namespace detail

// One epoch of batches. Shuffling is deterministic per (seed, epoch, mode);
// the last partial batch is kept. labeled covers source_labeled exactly
// once; unlabeled covers source_unlabeled + target_unlabeled exactly once.
// domain_mixed draws half of every batch from each domain, covering the
// larger side exactly once while the smaller side cycles.
inline std::vector<Batch> batch_epoch(const DatasetSplits& data, int batch_size, uint64_t seed,
                                      int epoch, BatchMode mode) {
  if (batch_size < 2) throw ValueError("batch size must be at least 2");
  Rng rng = Rng::from(seed, static_cast<uint64_t>(epoch) + 1, static_cast<uint64_t>(mode) + 1);
  std::vector<Batch> out;

  if (mode == BatchMode::labeled || mode == BatchMode::unlabeled) {
    std::vector<detail::Item> items;
    if (mode == BatchMode::labeled) {
      items = detail::collect(data.source_labeled, 0);
    } else {
      detail::append(items, data.source_unlabeled, 0);
      detail::append(items, data.target_unlabeled, 1);
    }
    if (items.empty()) throw ValueError("batch_epoch on an empty split");
    rng.shuffle(items);
    for (size_t at = 0; at < items.size(); at += static_cast<size_t>(batch_size)) {
      Batch b;
      const size_t end = std::min(items.size(), at + static_cast<size_t>(batch_size));
      for (size_t i = at; i < end; ++i) detail::push(b, items[i]);
      out.push_back(std::move(b));
    }
    return out;
  }

  if (batch_size % 2 != 0) throw ValueError("domain_mixed batches need an even batch size");
  std::vector<detail::Item> src, tgt;
  detail::append(src, data.source_labeled, 0);
  detail::append(src, data.source_unlabeled, 0);
  detail::append(tgt, data.target_unlabeled, 1);
  if (src.empty() || tgt.empty()) throw ValueError("batch_epoch on an empty split");
  rng.shuffle(src);
  rng.shuffle(tgt);
  const size_t half = static_cast<size_t>(batch_size) / 2;
  const size_t longer = std::max(src.size(), tgt.size());
  for (size_t at = 0; at < longer; at += half) {
    Batch b;
    const size_t take = std::min(half, longer - at);
    for (size_t i = 0; i < take; ++i) detail::push(b, src[(at + i) % src.size()]);
    for (size_t i = 0; i < take; ++i) detail::push(b, tgt[(at + i) % tgt.size()]);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace gast
