#include "vsp/counting.hpp"

#include <functional>

namespace vsp {

namespace {

struct SubCount {
  BigInt count;
  long size;
};

SubCount count_rec(const Mdt& m, int v) {
  if (m.is_leaf(v)) return {1, 1};
  BigInt acc = 1;
  long total = 0;
  for (int c : m.children(v)) {
    SubCount sc = count_rec(m, c);
    acc *= sc.count;
    total += sc.size;
    // Parallel: interleave the new block into the union built so far.
    if (!m.is_s(v))
      acc *= binomial(static_cast<unsigned long>(total), static_cast<unsigned long>(sc.size));
  }
  return {acc, total};
}

} // namespace

LeCount count_le(const Mdt& m) { return LeCount::of(count_rec(m, m.root()).count); }

LeCount count_le(const Bdt& t) { return count_le(bdt_collapse_to_mdt(t)); }

std::map<Actor, LeCount> top_counts(const Mdt& m) {
  std::map<Actor, LeCount> out;
  for (Actor a : m.actors()) {
    if (m.n_leaves() == 1) {
      out[a] = LeCount::of(1);
    } else if (!m.pred_free(a)) {
      out[a] = LeCount::of(0);
    } else {
      Mdt rest = m;
      rest.delete_leaf(a);
      out[a] = count_le(rest);
    }
  }
  return out;
}

std::map<Actor, LeCount> bottom_counts(const Mdt& m) {
  std::map<Actor, LeCount> out;
  for (Actor a : m.actors()) {
    if (m.n_leaves() == 1) {
      out[a] = LeCount::of(1);
    } else if (!m.succ_free(a)) {
      out[a] = LeCount::of(0);
    } else {
      Mdt rest = m;
      rest.delete_leaf(a);
      out[a] = count_le(rest);
    }
  }
  return out;
}

} // namespace vsp
