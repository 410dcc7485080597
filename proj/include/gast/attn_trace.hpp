#pragma once

#include <string>
#include <vector>

#include "gast/tensor.hpp"

namespace gast {

// Snapshot of one attention distribution taken during a forward pass.
// kind: "word" / "tag" (sequence encoder), "agg" / "act" (graph encoder).
struct AttnRecord {
  std::string kind;
  int layer = 0;
  int head = 0;
  int rows = 0;
  int cols = 0;
  std::vector<double> probs;  // row-major, one distribution per row
  BoolMatrix mask;            // empty for unmasked attention

  double at(int r, int c) const { return probs[static_cast<size_t>(r) * cols + c]; }
};

struct AttnTrace {
  std::vector<AttnRecord> records;

  void push(std::string kind, int layer, int head, const Tensor& probs, const BoolMatrix* mask) {
    AttnRecord r;
    r.kind = std::move(kind);
    r.layer = layer;
    r.head = head;
    r.rows = probs.rows();
    r.cols = probs.cols();
    r.probs = probs.data();
    if (mask) r.mask = *mask;
    records.push_back(std::move(r));
  }
};

}  // namespace gast
