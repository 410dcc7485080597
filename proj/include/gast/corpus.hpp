#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gast/tensor.hpp"

namespace gast {

inline std::string to_lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct Token {
  static constexpr int kRoot = -1;

  std::string form;
  std::string pos_tag;   // e.g. "JJ", "DT"
  int head = kRoot;      // 0-based index of the head token, or kRoot
  std::string deprel;    // e.g. "det", "nsubj"; "root" for the root token

  bool operator==(const Token&) const = default;
};

// String-to-id map with reserved PAD/UNK rows (and SELF for relation
// vocabularies). Ids are dense from 0; once frozen, unseen strings map to
// UNK.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kSelf = 2;  // relation vocabularies only

  enum class Kind { words, tags, relations };

  explicit Vocab(Kind kind = Kind::words) : kind_(kind) {
    register_reserved("<pad>");
    register_reserved("<unk>");
    if (kind_ == Kind::relations) register_reserved("<self>");
  }

  Kind kind() const { return kind_; }

  int add_or_lookup(const std::string& s) {
    auto it = ids_.find(s);
    if (it != ids_.end()) return it->second;
    if (frozen_) return kUnk;
    const int id = static_cast<int>(names_.size());
    ids_.emplace(s, id);
    names_.push_back(s);
    return id;
  }

  int lookup(const std::string& s) const {
    auto it = ids_.find(s);
    return it == ids_.end() ? kUnk : it->second;
  }

  bool contains(const std::string& s) const { return ids_.count(s) != 0; }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  int size() const { return static_cast<int>(names_.size()); }

  const std::string& name(int id) const {
    if (id < 0 || id >= size()) throw ValueError("vocab id " + std::to_string(id) + " out of range");
    return names_[static_cast<size_t>(id)];
  }

 private:
  void register_reserved(const std::string& s) {
    ids_.emplace(s, static_cast<int>(names_.size()));
    names_.push_back(s);
  }

  Kind kind_;
  bool frozen_ = false;
  std::map<std::string, int> ids_;
  std::vector<std::string> names_;
};

// One ingested block: tokens plus the syntactic graph built from the
// dependency heads. The adjacency is symmetric with a unit diagonal; both
// directions of an edge share one relation id, and the diagonal carries the
// reserved SELF relation.
struct SyntacticSentence {
  static constexpr int kUnlabeled = -1;
  static constexpr int kNoRelation = -1;

  std::vector<Token> tokens;
  BoolMatrix adjacency;
  IntMatrix relation_ids;
  int label = kUnlabeled;  // 0 = negative, 1 = positive
  std::string domain;

  int size() const { return static_cast<int>(tokens.size()); }

  // Structural equality; relation ids are derived data and follow from the
  // tokens under a shared vocabulary.
  bool operator==(const SyntacticSentence& o) const {
    return tokens == o.tokens && adjacency == o.adjacency && label == o.label && domain == o.domain;
  }
};

// Fills adjacency/relation_ids from the tokens' heads and deprels.
inline void build_graph(SyntacticSentence& s, Vocab& relations) {
  const int n = s.size();
  s.adjacency = BoolMatrix(n, n, false);
  s.relation_ids = IntMatrix(n, n, SyntacticSentence::kNoRelation);
  for (int i = 0; i < n; ++i) {
    s.adjacency.set(i, i, true);
    s.relation_ids.at(i, i) = Vocab::kSelf;
  }
  for (int i = 0; i < n; ++i) {
    const int h = s.tokens[static_cast<size_t>(i)].head;
    if (h == Token::kRoot) continue;
    const int rid = relations.add_or_lookup(s.tokens[static_cast<size_t>(i)].deprel);
    s.adjacency.set(i, h, true);
    s.adjacency.set(h, i, true);
    s.relation_ids.at(i, h) = rid;
    s.relation_ids.at(h, i) = rid;
  }
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream iss(line);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

struct PendingToken {
  Token token;
  int head_1based;  // 0 = root
  long line_no;
};

inline SyntacticSentence finish_block(std::vector<PendingToken>& pending, int label,
                                      std::string domain, long block_line, Vocab& relations) {
  const int n = static_cast<int>(pending.size());
  SyntacticSentence s;
  s.label = label;
  s.domain = std::move(domain);
  s.tokens.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& p = pending[static_cast<size_t>(i)];
    if (p.head_1based > n)
      throw ParseError("line " + std::to_string(p.line_no) + ": head " + std::to_string(p.head_1based) +
                       " out of range for sentence of length " + std::to_string(n));
    p.token.head = p.head_1based == 0 ? Token::kRoot : p.head_1based - 1;
    s.tokens.push_back(p.token);
  }
  // every token must reach the root; a walk longer than n means a cycle
  for (int i = 0; i < n; ++i) {
    int cur = i, steps = 0;
    while (cur != Token::kRoot) {
      cur = s.tokens[static_cast<size_t>(cur)].head;
      if (++steps > n)
        throw ParseError("line " + std::to_string(block_line) + ": cyclic heads in sentence");
    }
  }
  build_graph(s, relations);
  pending.clear();
  return s;
}

}  // namespace detail

// Reads CoNLL-U-like text: one token per line with columns
// ID FORM POS HEAD DEPREL, blank line between sentences, optional
// `# label = 0|1` and `# domain = <name>` comments. HEAD is 1-based with
// 0 (or "ROOT") marking the root.
inline std::vector<SyntacticSentence> parse_conllu(const std::string& text, Vocab& relations) {
  std::vector<SyntacticSentence> out;
  std::vector<detail::PendingToken> pending;
  int label = SyntacticSentence::kUnlabeled;
  std::string domain;
  long line_no = 0, block_line = 0;

  std::istringstream in(text);
  std::string raw;
  auto flush = [&]() {
    if (pending.empty()) return;
    out.push_back(detail::finish_block(pending, label, domain, block_line, relations));
    label = SyntacticSentence::kUnlabeled;
    domain.clear();
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(raw);
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      const size_t eq = line.find('=');
      if (eq != std::string::npos) {
        const std::string key = detail::trim(line.substr(1, eq - 1));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key == "label") {
          if (value != "0" && value != "1")
            throw ParseError("line " + std::to_string(line_no) + ": label must be 0 or 1, got '" + value + "'");
          label = value == "1" ? 1 : 0;
        } else if (key == "domain") {
          domain = value;
        }
      }
      continue;
    }
    auto cols = detail::split_ws(line);
    if (cols.size() < 5)
      throw ParseError("line " + std::to_string(line_no) + ": expected 5 columns (ID FORM POS HEAD DEPREL), got " +
                       std::to_string(cols.size()));
    if (pending.empty()) block_line = line_no;
    int id = 0;
    try {
      id = std::stoi(cols[0]);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(line_no) + ": bad token id '" + cols[0] + "'");
    }
    if (id != static_cast<int>(pending.size()) + 1)
      throw ParseError("line " + std::to_string(line_no) + ": token id " + std::to_string(id) +
                       " out of sequence");
    int head = 0;
    if (cols[3] == "ROOT" || cols[3] == "root") {
      head = 0;
    } else {
      try {
        head = std::stoi(cols[3]);
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad head '" + cols[3] + "'");
      }
    }
    if (head < 0) throw ParseError("line " + std::to_string(line_no) + ": negative head");
    if (head == id)
      throw ParseError("line " + std::to_string(line_no) + ": token is its own head");
    detail::PendingToken p;
    p.token.form = cols[1];
    p.token.pos_tag = cols[2];
    p.token.deprel = cols[4];
    p.head_1based = head;
    p.line_no = line_no;
    pending.push_back(std::move(p));
  }
  flush();
  return out;
}

inline std::string serialize_conllu(const SyntacticSentence& s) {
  std::ostringstream out;
  if (!s.domain.empty()) out << "# domain = " << s.domain << "\n";
  if (s.label != SyntacticSentence::kUnlabeled) out << "# label = " << s.label << "\n";
  for (int i = 0; i < s.size(); ++i) {
    const Token& t = s.tokens[static_cast<size_t>(i)];
    out << (i + 1) << '\t' << t.form << '\t' << t.pos_tag << '\t'
        << (t.head == Token::kRoot ? 0 : t.head + 1) << '\t' << t.deprel << "\n";
  }
  out << "\n";
  return out.str();
}

template <typename Range>
std::string serialize_corpus(const Range& sentences) {
  std::string out;
  for (const auto& s : sentences) out += serialize_conllu(s);
  return out;
}

// Percentage of non-SELF edges per relation label; each undirected edge is
// counted once (one per token with a head). Percentages sum to 100.
template <typename Range>
std::map<std::string, double> relation_distribution(const Range& sentences) {
  if (std::begin(sentences) == std::end(sentences)) throw ValueError("relation_distribution on empty corpus");
  std::map<std::string, long> counts;
  long total = 0;
  for (const auto& s : sentences)
    for (const auto& t : s.tokens)
      if (t.head != Token::kRoot) {
        ++counts[t.deprel];
        ++total;
      }
  std::map<std::string, double> out;
  if (total == 0) return out;
  for (const auto& [rel, c] : counts)
    out[rel] = 100.0 * static_cast<double>(c) / static_cast<double>(total);
  return out;
}

}  // namespace gast
