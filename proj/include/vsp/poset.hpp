#ifndef VSP_POSET_HPP
#define VSP_POSET_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vsp/error.hpp"

namespace vsp {

using Actor = int;

// Square boolean matrix stored as 64-bit row words.
class BitMatrix {
public:
  BitMatrix() = default;
  explicit BitMatrix(int n) : n_(n), words_((n + 63) / 64), w_(static_cast<size_t>(n) * words_, 0) {}

  int size() const { return n_; }

  bool get(int i, int j) const {
    return (w_[static_cast<size_t>(i) * words_ + j / 64] >> (j % 64)) & 1u;
  }
  void set(int i, int j, bool v) {
    uint64_t& word = w_[static_cast<size_t>(i) * words_ + j / 64];
    uint64_t bit = 1ULL << (j % 64);
    if (v)
      word |= bit;
    else
      word &= ~bit;
  }
  // row(i) |= row(j)
  void or_row(int i, int j) {
    for (int k = 0; k < words_; ++k)
      w_[static_cast<size_t>(i) * words_ + k] |= w_[static_cast<size_t>(j) * words_ + k];
  }
  bool operator==(const BitMatrix& o) const { return n_ == o.n_ && w_ == o.w_; }

private:
  int n_ = 0;
  int words_ = 0;
  std::vector<uint64_t> w_;
};

// Transitively closed, irreflexive, antisymmetric relation over labelled
// actors. rel(i,j) means actor at position i precedes (is above) actor at
// position j. Immutable after construction.
class PartialOrder {
public:
  PartialOrder() = default;
  // Requires `rel` already closed; checked.
  PartialOrder(BitMatrix rel, std::vector<Actor> labels);

  static PartialOrder empty_order(std::vector<Actor> labels);

  int n() const { return n_; }
  const std::vector<Actor>& labels() const { return labels_; }
  const BitMatrix& relation() const { return rel_; }

  bool rel(int i, int j) const { return rel_.get(i, j); }
  bool rel_actor(Actor a, Actor b) const { return rel_.get(index_of(a), index_of(b)); }
  int index_of(Actor a) const;

  // All relations reversed.
  PartialOrder dual() const;

  // Canonical string over the sorted label set; equal keys iff equal orders.
  std::string closure_key() const;

  bool operator==(const PartialOrder& o) const;

private:
  int n_ = 0;
  BitMatrix rel_;
  std::vector<Actor> labels_;
};

using ActorSubset = std::vector<Actor>;

struct Edge {
  int from = 0; // positions, not labels
  int to = 0;
  bool operator==(const Edge& o) const { return from == o.from && to == o.to; }
  bool operator<(const Edge& o) const { return from < o.from || (from == o.from && to < o.to); }
};

// Closes a raw acyclic relation. Throws CycleDetected.
PartialOrder transitive_closure(const BitMatrix& raw, std::vector<Actor> labels);

// Minimal edge set whose closure equals po (unique for a DAG).
std::vector<Edge> transitive_reduction(const PartialOrder& po);

// Sub-order on the given labels (order of `o` preserved in the result).
PartialOrder restrict_to(const PartialOrder& po, const ActorSubset& o);

// Cardinality of the longest chain, in [1, n].
int depth(const PartialOrder& po);

// Forbidden sub-graph test: true iff no ordered 4-tuple matches
// F = ([4], {<1,3>,<1,4>,<2,4>}) with the complement pairs unrelated.
bool is_vsp(const PartialOrder& po);
// Witness positions (a,b,c,d) of a forbidden pattern, if any.
std::optional<std::array<int, 4>> forbidden_subgraph_witness(const PartialOrder& po);

// Exhaustive oracles, small n only.
std::vector<std::vector<Actor>> enumerate_linear_extensions(const PartialOrder& po,
                                                            int bound = 10);
std::vector<PartialOrder> enumerate_posets(int n);

} // namespace vsp

#endif
