#include "vsp/poset.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace vsp {

namespace {

void check_labels(const std::vector<Actor>& labels) {
  std::vector<Actor> s = labels;
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end())
    throw Error("duplicate actor label");
}

// Indices in topological order (sources first); throws on a cycle.
std::vector<int> topological_order(const BitMatrix& m) {
  int n = m.size();
  std::vector<int> indeg(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (m.get(i, j)) ++indeg[j];
  std::vector<int> order;
  order.reserve(n);
  std::vector<int> stack;
  for (int i = 0; i < n; ++i)
    if (indeg[i] == 0) stack.push_back(i);
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    order.push_back(i);
    for (int j = 0; j < n; ++j)
      if (m.get(i, j) && --indeg[j] == 0) stack.push_back(j);
  }
  if (static_cast<int>(order.size()) != n) throw CycleDetected("relation contains a cycle");
  return order;
}

} // namespace

PartialOrder::PartialOrder(BitMatrix rel, std::vector<Actor> labels)
    : n_(rel.size()), rel_(std::move(rel)), labels_(std::move(labels)) {
  if (static_cast<int>(labels_.size()) != n_) throw Error("label count mismatch");
  check_labels(labels_);
  for (int i = 0; i < n_; ++i) {
    if (rel_.get(i, i)) throw Error("relation not irreflexive");
    for (int j = 0; j < n_; ++j) {
      if (i != j && rel_.get(i, j) && rel_.get(j, i)) throw Error("relation not antisymmetric");
      if (rel_.get(i, j))
        for (int k = 0; k < n_; ++k)
          if (rel_.get(j, k) && !rel_.get(i, k)) throw Error("relation not transitively closed");
    }
  }
}

PartialOrder PartialOrder::empty_order(std::vector<Actor> labels) {
  BitMatrix m(static_cast<int>(labels.size()));
  return PartialOrder(std::move(m), std::move(labels));
}

int PartialOrder::index_of(Actor a) const {
  for (int i = 0; i < n_; ++i)
    if (labels_[i] == a) return i;
  throw UnknownActor("unknown actor " + std::to_string(a));
}

PartialOrder PartialOrder::dual() const {
  BitMatrix m(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (rel_.get(i, j)) m.set(j, i, true);
  return PartialOrder(std::move(m), labels_);
}

std::string PartialOrder::closure_key() const {
  std::vector<int> idx(n_);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return labels_[a] < labels_[b]; });
  std::ostringstream os;
  for (int i : idx) os << labels_[i] << ',';
  os << '|';
  for (int i : idx) {
    for (int j : idx) os << (rel_.get(i, j) ? '1' : '0');
  }
  return os.str();
}

bool PartialOrder::operator==(const PartialOrder& o) const {
  if (n_ != o.n_) return false;
  return closure_key() == o.closure_key();
}

PartialOrder transitive_closure(const BitMatrix& raw, std::vector<Actor> labels) {
  int n = raw.size();
  for (int i = 0; i < n; ++i)
    if (raw.get(i, i)) throw CycleDetected("self relation");
  std::vector<int> order = topological_order(raw);
  BitMatrix closed = raw;
  // Reverse topological sweep: each row absorbs its successors' rows.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int i = *it;
    for (int j = 0; j < n; ++j)
      if (closed.get(i, j)) closed.or_row(i, j);
  }
  for (int i = 0; i < n; ++i)
    if (closed.get(i, i)) throw CycleDetected("closure forces a self relation");
  return PartialOrder(std::move(closed), std::move(labels));
}

std::vector<Edge> transitive_reduction(const PartialOrder& po) {
  int n = po.n();
  std::vector<Edge> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (!po.rel(i, j)) continue;
      bool implied = false;
      for (int k = 0; k < n && !implied; ++k)
        if (po.rel(i, k) && po.rel(k, j)) implied = true;
      if (!implied) out.push_back({i, j});
    }
  return out;
}

PartialOrder restrict_to(const PartialOrder& po, const ActorSubset& o) {
  int m = static_cast<int>(o.size());
  std::vector<int> pos(m);
  for (int i = 0; i < m; ++i) pos[i] = po.index_of(o[i]);
  BitMatrix r(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (po.rel(pos[i], pos[j])) r.set(i, j, true);
  return PartialOrder(std::move(r), o);
}

int depth(const PartialOrder& po) {
  int n = po.n();
  if (n == 0) return 0;
  std::vector<int> best(n, -1);
  // Longest chain ending at i; relation is closed so predecessors are direct.
  std::vector<int> order = topological_order(po.relation());
  for (int i : order) {
    int d = 1;
    for (int j = 0; j < n; ++j)
      if (po.rel(j, i)) d = std::max(d, best[j] + 1);
    best[i] = d;
  }
  return *std::max_element(best.begin(), best.end());
}

std::optional<std::array<int, 4>> forbidden_subgraph_witness(const PartialOrder& po) {
  int n = po.n();
  auto unrelated = [&](int a, int b) { return !po.rel(a, b) && !po.rel(b, a); };
  for (int a = 0; a < n; ++a)
    for (int c = 0; c < n; ++c) {
      if (c == a || !po.rel(a, c)) continue;
      for (int d = 0; d < n; ++d) {
        if (d == a || d == c || !po.rel(a, d) || !unrelated(c, d)) continue;
        for (int b = 0; b < n; ++b) {
          if (b == a || b == c || b == d) continue;
          if (po.rel(b, d) && unrelated(a, b) && unrelated(b, c))
            return std::array<int, 4>{a, b, c, d};
        }
      }
    }
  return std::nullopt;
}

bool is_vsp(const PartialOrder& po) { return !forbidden_subgraph_witness(po).has_value(); }

namespace {

void extend(const PartialOrder& po, std::vector<int>& prefix, std::vector<bool>& used,
            std::vector<std::vector<Actor>>& out) {
  int n = po.n();
  if (static_cast<int>(prefix.size()) == n) {
    std::vector<Actor> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = po.labels()[prefix[i]];
    out.push_back(std::move(perm));
    return;
  }
  for (int i = 0; i < n; ++i) {
    if (used[i]) continue;
    bool minimal = true;
    for (int j = 0; j < n && minimal; ++j)
      if (!used[j] && po.rel(j, i)) minimal = false;
    if (!minimal) continue;
    used[i] = true;
    prefix.push_back(i);
    extend(po, prefix, used, out);
    prefix.pop_back();
    used[i] = false;
  }
}

} // namespace

std::vector<std::vector<Actor>> enumerate_linear_extensions(const PartialOrder& po, int bound) {
  if (po.n() > bound)
    throw OracleBoundExceeded("linear extension enumeration limited to n <= " +
                              std::to_string(bound));
  std::vector<std::vector<Actor>> out;
  std::vector<int> prefix;
  std::vector<bool> used(po.n(), false);
  extend(po, prefix, used, out);
  return out;
}

std::vector<PartialOrder> enumerate_posets(int n) {
  if (n > 5) throw OracleBoundExceeded("poset enumeration limited to n <= 5");
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<Actor> labels(n);
  std::iota(labels.begin(), labels.end(), 1);

  std::vector<PartialOrder> out;
  long total = 1;
  for (size_t i = 0; i < pairs.size(); ++i) total *= 3;
  for (long code = 0; code < total; ++code) {
    BitMatrix m(n);
    long c = code;
    for (auto [i, j] : pairs) {
      int choice = static_cast<int>(c % 3);
      c /= 3;
      if (choice == 1) m.set(i, j, true);
      if (choice == 2) m.set(j, i, true);
    }
    // Keep relations equal to their own closure.
    bool closed = true;
    for (int i = 0; i < n && closed; ++i)
      for (int j = 0; j < n && closed; ++j) {
        if (!m.get(i, j)) continue;
        for (int k = 0; k < n; ++k)
          if (m.get(j, k) && !m.get(i, k)) {
            closed = false;
            break;
          }
      }
    if (closed) out.emplace_back(m, labels);
  }
  return out;
}

} // namespace vsp
