#include "vsp/tree.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

namespace vsp {

// ---------------------------------------------------------------------------
// Bdt

int Bdt::new_node() {
  int v;
  if (!free_.empty()) {
    v = free_.back();
    free_.pop_back();
    nodes_[v] = Node{};
  } else {
    v = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
  }
  nodes_[v].alive = true;
  return v;
}

void Bdt::free_node(int v) {
  nodes_[v].alive = false;
  free_.push_back(v);
}

Bdt Bdt::single(Actor a) {
  Bdt t;
  int v = t.new_node();
  t.nodes_[v].actor = a;
  t.root_ = v;
  t.n_ = 1;
  return t;
}

Bdt Bdt::combine(bool series, const Bdt& upper, const Bdt& lower) {
  Bdt t;
  // Copy a subtree across pools.
  std::function<int(const Bdt&, int)> copy = [&](const Bdt& src, int v) -> int {
    int w = t.new_node();
    t.nodes_[w].actor = src.nodes_[v].actor;
    t.nodes_[w].s_type = src.nodes_[v].s_type;
    t.nodes_[w].upper = src.nodes_[v].upper;
    if (!src.is_leaf(v)) {
      for (int slot = 0; slot < 2; ++slot) {
        int c = copy(src, src.nodes_[v].child[slot]);
        t.nodes_[w].child[slot] = c;
        t.nodes_[c].parent = w;
      }
    }
    return w;
  };
  int u = copy(upper, upper.root());
  int l = copy(lower, lower.root());
  int r = t.new_node();
  t.nodes_[r].s_type = series;
  t.nodes_[r].upper = 0;
  t.nodes_[r].child[0] = u;
  t.nodes_[r].child[1] = l;
  t.nodes_[u].parent = r;
  t.nodes_[l].parent = r;
  t.root_ = r;
  t.n_ = upper.n_ + lower.n_;
  return t;
}

int Bdt::sibling(int v) const {
  int p = nodes_[v].parent;
  if (p < 0) throw Error("root has no sibling");
  return nodes_[p].child[0] == v ? nodes_[p].child[1] : nodes_[p].child[0];
}

std::vector<int> Bdt::node_ids() const {
  std::vector<int> out;
  if (root_ < 0) return out;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    out.push_back(v);
    if (!is_leaf(v)) {
      stack.push_back(nodes_[v].child[0]);
      stack.push_back(nodes_[v].child[1]);
    }
  }
  return out;
}

std::vector<int> Bdt::leaf_ids() const {
  std::vector<int> out;
  for (int v : node_ids())
    if (is_leaf(v)) out.push_back(v);
  return out;
}

std::vector<Actor> Bdt::actors() const {
  std::vector<Actor> out;
  for (int v : leaf_ids()) out.push_back(nodes_[v].actor);
  std::sort(out.begin(), out.end());
  return out;
}

int Bdt::find_leaf(Actor a) const {
  for (int v : leaf_ids())
    if (nodes_[v].actor == a) return v;
  return -1;
}

int Bdt::subtree_leaf_count(int v) const {
  if (is_leaf(v)) return 1;
  return subtree_leaf_count(nodes_[v].child[0]) + subtree_leaf_count(nodes_[v].child[1]);
}

bool Bdt::in_subtree(int top, int v) const {
  for (int x = v; x >= 0; x = nodes_[x].parent)
    if (x == top) return true;
  return false;
}

int Bdt::s_count() const {
  int s = 0;
  for (int v : node_ids())
    if (!is_leaf(v) && nodes_[v].s_type) ++s;
  return s;
}

int Bdt::insert_leaf(int edge_child, Actor a, TypeDraw draw) {
  if (find_leaf(a) >= 0) throw ActorPresent("actor " + std::to_string(a) + " already present");
  if (!alive(edge_child)) throw EdgeNotFound("no edge above node " + std::to_string(edge_child));
  int leaf = new_node();
  nodes_[leaf].actor = a;
  int j = new_node();
  nodes_[j].s_type = (draw != TypeDraw::P);
  int p = nodes_[edge_child].parent;
  nodes_[j].child[0] = edge_child;
  nodes_[j].child[1] = leaf;
  // New leaf sits in slot 1; S-up stacks it above the old subtree.
  nodes_[j].upper = (draw == TypeDraw::SUp) ? 1 : 0;
  nodes_[edge_child].parent = j;
  nodes_[leaf].parent = j;
  if (p < 0) {
    root_ = j;
    nodes_[j].parent = -1;
  } else {
    nodes_[p].child[nodes_[p].child[0] == edge_child ? 0 : 1] = j;
    nodes_[j].parent = p;
  }
  ++n_;
  return j;
}

void Bdt::delete_leaf(Actor a) {
  int v = find_leaf(a);
  if (v < 0) throw UnknownActor("actor " + std::to_string(a) + " not in tree");
  if (n_ <= 1) throw LastActor("cannot delete the last actor");
  int p = nodes_[v].parent;
  int s = sibling(v);
  int g = nodes_[p].parent;
  if (g < 0) {
    root_ = s;
    nodes_[s].parent = -1;
  } else {
    nodes_[g].child[nodes_[g].child[0] == p ? 0 : 1] = s;
    nodes_[s].parent = g;
  }
  free_node(v);
  free_node(p);
  --n_;
}

std::vector<int> Bdt::regraft_targets(int edge_child) const {
  int p = nodes_[edge_child].parent;
  std::vector<int> out;
  for (int v : node_ids()) {
    if (v == p || in_subtree(edge_child, v)) continue;
    out.push_back(v);
  }
  return out;
}

std::vector<int> Bdt::local_regraft_targets(int edge_child) const {
  int p = nodes_[edge_child].parent;
  if (p < 0) throw Error("cannot move the virtual root edge");
  int s = sibling(edge_child);
  int g = nodes_[p].parent;
  std::vector<int> out;
  if (g < 0) {
    // Vacated edge is the virtual edge above the sibling.
    if (!is_leaf(s)) {
      out.push_back(nodes_[s].child[0]);
      out.push_back(nodes_[s].child[1]);
    }
  } else {
    out.push_back(g); // edge above g (virtual if g is the root)
    out.push_back(nodes_[g].child[0] == p ? nodes_[g].child[1] : nodes_[g].child[0]);
    if (!is_leaf(s)) {
      out.push_back(nodes_[s].child[0]);
      out.push_back(nodes_[s].child[1]);
    }
  }
  return out;
}

void Bdt::regraft(int edge_child, int target, Rng& rng) {
  int p = nodes_[edge_child].parent;
  if (p < 0) throw Error("cannot move the virtual root edge");
  if (target == p || in_subtree(edge_child, target)) throw Error("invalid regraft target");
  int s = sibling(edge_child);
  int g = nodes_[p].parent;
  // Splice p out.
  if (g < 0) {
    root_ = s;
    nodes_[s].parent = -1;
  } else {
    nodes_[g].child[nodes_[g].child[0] == p ? 0 : 1] = s;
    nodes_[s].parent = g;
  }
  // Insert p into the edge above target.
  int tp = nodes_[target].parent;
  if (tp < 0) {
    root_ = p;
    nodes_[p].parent = -1;
  } else {
    nodes_[tp].child[nodes_[tp].child[0] == target ? 0 : 1] = p;
    nodes_[p].parent = tp;
  }
  nodes_[p].child[0] = edge_child;
  nodes_[p].child[1] = target;
  nodes_[edge_child].parent = p;
  nodes_[target].parent = p;
  if (nodes_[p].s_type) nodes_[p].upper = static_cast<int>(rng.uniform_int(2));
}

bool Bdt::pred_free(Actor a) const {
  int v = find_leaf(a);
  if (v < 0) throw UnknownActor("actor " + std::to_string(a) + " not in tree");
  for (int p = nodes_[v].parent; p >= 0; v = p, p = nodes_[p].parent)
    if (nodes_[p].s_type && upper_child(p) != v) return false;
  return true;
}

bool Bdt::succ_free(Actor a) const {
  int v = find_leaf(a);
  if (v < 0) throw UnknownActor("actor " + std::to_string(a) + " not in tree");
  for (int p = nodes_[v].parent; p >= 0; v = p, p = nodes_[p].parent)
    if (nodes_[p].s_type && lower_child(p) != v) return false;
  return true;
}

void Bdt::flip_type(int v, Rng& rng) {
  if (is_leaf(v)) throw Error("cannot flip a leaf");
  if (nodes_[v].s_type) {
    nodes_[v].s_type = false;
  } else {
    nodes_[v].s_type = true;
    nodes_[v].upper = static_cast<int>(rng.uniform_int(2));
  }
}

void Bdt::set_type(int v, bool s, int upper_slot) {
  nodes_[v].s_type = s;
  nodes_[v].upper = upper_slot;
}

void Bdt::validate() const {
  if (root_ < 0 || !nodes_[root_].alive) throw Error("bdt: dead root");
  if (nodes_[root_].parent != -1) throw Error("bdt: root has a parent");
  int leaves = 0, internals = 0;
  std::vector<Actor> seen;
  for (int v : node_ids()) {
    const Node& nd = nodes_[v];
    if (!nd.alive) throw Error("bdt: dead node reachable");
    if (is_leaf(v)) {
      ++leaves;
      seen.push_back(nd.actor);
      if (nd.child[0] != -1 || nd.child[1] != -1) throw Error("bdt: leaf with children");
    } else {
      ++internals;
      for (int slot = 0; slot < 2; ++slot) {
        int c = nd.child[slot];
        if (c < 0 || !nodes_[c].alive) throw Error("bdt: missing child");
        if (nodes_[c].parent != v) throw Error("bdt: parent link broken");
      }
      if (nd.child[0] == nd.child[1]) throw Error("bdt: duplicate child");
      if (nd.upper != 0 && nd.upper != 1) throw Error("bdt: bad stacking slot");
    }
  }
  if (leaves != n_) throw Error("bdt: leaf count mismatch");
  if (internals != n_ - 1) throw Error("bdt: internal count mismatch");
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw Error("bdt: duplicate actor");
}

void Bdt::canon(int v, std::string& out, bool with_types) const {
  if (is_leaf(v)) {
    out += std::to_string(nodes_[v].actor);
    return;
  }
  if (with_types && nodes_[v].s_type) {
    out += "S(";
    canon(upper_child(v), out, with_types);
    out += ',';
    canon(lower_child(v), out, with_types);
    out += ')';
    return;
  }
  std::string a, b;
  canon(nodes_[v].child[0], a, with_types);
  canon(nodes_[v].child[1], b, with_types);
  if (b < a) std::swap(a, b);
  out += with_types ? "P(" : "(";
  out += a;
  out += ',';
  out += b;
  out += ')';
}

std::string Bdt::canonical_string() const {
  std::string out;
  canon(root_, out, true);
  return out;
}

std::string Bdt::topology_string() const {
  std::string out;
  canon(root_, out, false);
  return out;
}

// ---------------------------------------------------------------------------
// Mdt

int Mdt::new_node() {
  int v;
  if (!free_.empty()) {
    v = free_.back();
    free_.pop_back();
    nodes_[v] = Node{};
  } else {
    v = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
  }
  nodes_[v].alive = true;
  return v;
}

void Mdt::free_node(int v) {
  nodes_[v].alive = false;
  free_.push_back(v);
}

Mdt Mdt::single(Actor a) {
  Mdt m;
  int v = m.new_node();
  m.nodes_[v].actor = a;
  m.root_ = v;
  m.n_ = 1;
  return m;
}

Mdt Mdt::internal(bool series, std::vector<Mdt> children) {
  if (children.size() < 2) throw Error("mdt: internal node needs >= 2 children");
  Mdt m;
  std::function<int(const Mdt&, int)> copy = [&](const Mdt& src, int v) -> int {
    int w = m.new_node();
    m.nodes_[w].actor = src.nodes_[v].actor;
    m.nodes_[w].s_type = src.nodes_[v].s_type;
    for (int c : src.nodes_[v].children) {
      int cc = copy(src, c);
      m.nodes_[w].children.push_back(cc);
      m.nodes_[cc].parent = w;
    }
    return w;
  };
  int r = m.new_node();
  m.nodes_[r].s_type = series;
  for (const Mdt& ch : children) {
    int c = copy(ch, ch.root());
    m.nodes_[r].children.push_back(c);
    m.nodes_[c].parent = r;
    m.n_ += ch.n_;
  }
  m.root_ = r;
  m.validate();
  return m;
}

std::vector<int> Mdt::node_ids() const {
  std::vector<int> out;
  if (root_ < 0) return out;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    out.push_back(v);
    for (int c : nodes_[v].children) stack.push_back(c);
  }
  return out;
}

std::vector<int> Mdt::internal_ids() const {
  std::vector<int> out;
  for (int v : node_ids())
    if (!is_leaf(v)) out.push_back(v);
  return out;
}

std::vector<Actor> Mdt::actors() const {
  std::vector<Actor> out;
  for (int v : node_ids())
    if (is_leaf(v)) out.push_back(nodes_[v].actor);
  std::sort(out.begin(), out.end());
  return out;
}

int Mdt::find_leaf(Actor a) const {
  for (int v : node_ids())
    if (is_leaf(v) && nodes_[v].actor == a) return v;
  return -1;
}

int Mdt::subtree_leaf_count(int v) const {
  if (is_leaf(v)) return 1;
  int c = 0;
  for (int ch : nodes_[v].children) c += subtree_leaf_count(ch);
  return c;
}

bool Mdt::in_subtree(int top, int v) const {
  for (int x = v; x >= 0; x = nodes_[x].parent)
    if (x == top) return true;
  return false;
}

void Mdt::detach_child(int p, int c) {
  auto& ch = nodes_[p].children;
  auto it = std::find(ch.begin(), ch.end(), c);
  if (it == ch.end()) throw Error("mdt: detach of a non-child");
  ch.erase(it);
  nodes_[c].parent = -1;
}

void Mdt::attach_child(int p, int c, int position) {
  auto& ch = nodes_[p].children;
  position = std::max(0, std::min<int>(position, static_cast<int>(ch.size())));
  ch.insert(ch.begin() + position, c);
  nodes_[c].parent = p;
}

int Mdt::new_internal(bool s_type) {
  int v = new_node();
  nodes_[v].s_type = s_type;
  return v;
}

void Mdt::replace_child(int p, int old_child, int new_child) {
  auto& ch = nodes_[p].children;
  auto it = std::find(ch.begin(), ch.end(), old_child);
  if (it == ch.end()) throw Error("mdt: replace of a non-child");
  *it = new_child;
  nodes_[new_child].parent = p;
}

void Mdt::free_internal(int v) { free_node(v); }

void Mdt::delete_leaf(Actor a) {
  int v = find_leaf(a);
  if (v < 0) throw UnknownActor("actor " + std::to_string(a) + " not in tree");
  if (n_ <= 1) throw LastActor("cannot delete the last actor");
  int p = nodes_[v].parent;
  detach_child(p, v);
  free_node(v);
  --n_;
  if (nodes_[p].children.size() >= 2) return;
  // Splice out the degree-1 parent; merge same-type adjacency it exposes.
  int c = nodes_[p].children[0];
  int g = nodes_[p].parent;
  if (g < 0) {
    root_ = c;
    nodes_[c].parent = -1;
    free_node(p);
    return;
  }
  auto& gch = nodes_[g].children;
  auto it = std::find(gch.begin(), gch.end(), p);
  size_t pos = static_cast<size_t>(it - gch.begin());
  free_node(p);
  if (!is_leaf(c) && nodes_[c].s_type == nodes_[g].s_type) {
    gch.erase(gch.begin() + pos);
    auto& cch = nodes_[c].children;
    gch.insert(gch.begin() + pos, cch.begin(), cch.end());
    for (int x : cch) nodes_[x].parent = g;
    free_node(c);
  } else {
    gch[pos] = c;
    nodes_[c].parent = g;
  }
}

bool Mdt::pred_free(Actor a) const {
  int v = find_leaf(a);
  if (v < 0) throw UnknownActor("actor " + std::to_string(a) + " not in tree");
  for (int p = nodes_[v].parent; p >= 0; v = p, p = nodes_[p].parent)
    if (nodes_[p].s_type && nodes_[p].children.front() != v) return false;
  return true;
}

bool Mdt::succ_free(Actor a) const {
  int v = find_leaf(a);
  if (v < 0) throw UnknownActor("actor " + std::to_string(a) + " not in tree");
  for (int p = nodes_[v].parent; p >= 0; v = p, p = nodes_[p].parent)
    if (nodes_[p].s_type && nodes_[p].children.back() != v) return false;
  return true;
}

Actor Mdt::min_actor(int v) const {
  if (is_leaf(v)) return nodes_[v].actor;
  Actor best = std::numeric_limits<Actor>::max();
  for (int c : nodes_[v].children) best = std::min(best, min_actor(c));
  return best;
}

void Mdt::canonicalize() {
  for (int v : internal_ids()) {
    if (nodes_[v].s_type) continue;
    std::sort(nodes_[v].children.begin(), nodes_[v].children.end(),
              [&](int a, int b) { return min_actor(a) < min_actor(b); });
  }
}

void Mdt::canon(int v, std::string& out) const {
  if (is_leaf(v)) {
    out += std::to_string(nodes_[v].actor);
    return;
  }
  std::vector<int> order = nodes_[v].children;
  if (!nodes_[v].s_type)
    std::sort(order.begin(), order.end(), [&](int a, int b) { return min_actor(a) < min_actor(b); });
  out += nodes_[v].s_type ? "S(" : "P(";
  bool first = true;
  for (int c : order) {
    if (!first) out += ',';
    first = false;
    canon(c, out);
  }
  out += ')';
}

std::string Mdt::canonical_string() const {
  std::string out;
  canon(root_, out);
  return out;
}

void Mdt::validate() const {
  if (root_ < 0 || !nodes_[root_].alive) throw Error("mdt: dead root");
  if (nodes_[root_].parent != -1) throw Error("mdt: root has a parent");
  int leaves = 0;
  std::vector<Actor> seen;
  for (int v : node_ids()) {
    const Node& nd = nodes_[v];
    if (!nd.alive) throw Error("mdt: dead node reachable");
    if (is_leaf(v)) {
      ++leaves;
      seen.push_back(nd.actor);
      if (!nd.children.empty()) throw Error("mdt: leaf with children");
      continue;
    }
    if (nd.children.size() < 2) throw Error("mdt: internal node with < 2 children");
    for (int c : nd.children) {
      if (!alive(c)) throw Error("mdt: missing child");
      if (nodes_[c].parent != v) throw Error("mdt: parent link broken");
      if (!is_leaf(c) && nodes_[c].s_type == nd.s_type)
        throw Error("mdt: adjacent internal nodes of equal type");
    }
  }
  if (leaves != n_) throw Error("mdt: leaf count mismatch");
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw Error("mdt: duplicate actor");
}

// ---------------------------------------------------------------------------
// Maps between trees and partial orders

namespace {

// Actor positions of the subtree, in stacking order for S chains.
template <typename Tree>
void gather_actors(const Tree& t, int v, std::vector<Actor>& out);

template <>
void gather_actors<Bdt>(const Bdt& t, int v, std::vector<Actor>& out) {
  if (t.is_leaf(v)) {
    out.push_back(t.actor(v));
    return;
  }
  gather_actors(t, t.child(v, 0), out);
  gather_actors(t, t.child(v, 1), out);
}

template <>
void gather_actors<Mdt>(const Mdt& t, int v, std::vector<Actor>& out) {
  if (t.is_leaf(v)) {
    out.push_back(t.actor(v));
    return;
  }
  for (int c : t.children(v)) gather_actors(t, c, out);
}

} // namespace

PartialOrder bdt_to_vsp(const Bdt& t) {
  std::vector<Actor> labels = t.actors();
  int n = static_cast<int>(labels.size());
  std::map<Actor, int> pos;
  for (int i = 0; i < n; ++i) pos[labels[i]] = i;
  BitMatrix rel(n);
  std::function<void(int)> walk = [&](int v) {
    if (t.is_leaf(v)) return;
    walk(t.child(v, 0));
    walk(t.child(v, 1));
    if (t.is_s(v)) {
      std::vector<Actor> up, lo;
      gather_actors(t, t.upper_child(v), up);
      gather_actors(t, t.lower_child(v), lo);
      for (Actor a : up)
        for (Actor b : lo) rel.set(pos[a], pos[b], true);
    }
  };
  walk(t.root());
  return PartialOrder(std::move(rel), std::move(labels));
}

PartialOrder mdt_to_vsp(const Mdt& m) {
  std::vector<Actor> labels = m.actors();
  int n = static_cast<int>(labels.size());
  std::map<Actor, int> pos;
  for (int i = 0; i < n; ++i) pos[labels[i]] = i;
  BitMatrix rel(n);
  std::function<void(int)> walk = [&](int v) {
    if (m.is_leaf(v)) return;
    for (int c : m.children(v)) walk(c);
    if (m.is_s(v)) {
      const auto& ch = m.children(v);
      for (size_t i = 0; i < ch.size(); ++i)
        for (size_t j = i + 1; j < ch.size(); ++j) {
          std::vector<Actor> up, lo;
          gather_actors(m, ch[i], up);
          gather_actors(m, ch[j], lo);
          for (Actor a : up)
            for (Actor b : lo) rel.set(pos[a], pos[b], true);
        }
    }
  };
  walk(m.root());
  return PartialOrder(std::move(rel), std::move(labels));
}

Mdt bdt_collapse_to_mdt(const Bdt& t) {
  // Maximal same-type clusters flatten to one multiway node; S stacking
  // order is the top-to-bottom order of the cluster's leaves-of-cluster.
  std::function<Mdt(int)> build = [&](int v) -> Mdt {
    if (t.is_leaf(v)) return Mdt::single(t.actor(v));
    bool s = t.is_s(v);
    std::vector<Mdt> kids;
    std::function<void(int)> flatten = [&](int u) {
      if (!t.is_leaf(u) && t.is_s(u) == s) {
        flatten(s ? t.upper_child(u) : t.child(u, 0));
        flatten(s ? t.lower_child(u) : t.child(u, 1));
      } else {
        kids.push_back(build(u));
      }
    };
    flatten(s ? t.upper_child(v) : t.child(v, 0));
    flatten(s ? t.lower_child(v) : t.child(v, 1));
    return Mdt::internal(s, std::move(kids));
  };
  Mdt out = t.n_leaves() == 1 ? Mdt::single(t.actor(t.root())) : build(t.root());
  out.canonicalize();
  return out;
}

Mdt vsp_to_mdt(const PartialOrder& po) {
  std::function<Mdt(const std::vector<int>&)> decompose =
      [&](const std::vector<int>& pos) -> Mdt {
    if (pos.size() == 1) return Mdt::single(po.labels()[pos[0]]);
    int k = static_cast<int>(pos.size());
    auto components = [&](bool comparable) {
      std::vector<int> comp(k, -1);
      int nc = 0;
      for (int s = 0; s < k; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> stack{s};
        comp[s] = nc;
        while (!stack.empty()) {
          int i = stack.back();
          stack.pop_back();
          for (int j = 0; j < k; ++j) {
            if (comp[j] >= 0 || i == j) continue;
            bool related = po.rel(pos[i], pos[j]) || po.rel(pos[j], pos[i]);
            if (related == comparable) {
              comp[j] = nc;
              stack.push_back(j);
            }
          }
        }
        ++nc;
      }
      std::vector<std::vector<int>> blocks(nc);
      for (int i = 0; i < k; ++i) blocks[comp[i]].push_back(pos[i]);
      return blocks;
    };
    auto par = components(true);
    if (par.size() > 1) {
      std::vector<Mdt> kids;
      for (auto& b : par) kids.push_back(decompose(b));
      return Mdt::internal(false, std::move(kids));
    }
    auto ser = components(false);
    if (ser.size() <= 1) throw NotVsp("partial order is not series-parallel");
    std::sort(ser.begin(), ser.end(), [&](const std::vector<int>& a, const std::vector<int>& b) {
      return po.rel(a[0], b[0]);
    });
    // Every earlier block must dominate every later one.
    for (size_t i = 0; i < ser.size(); ++i)
      for (size_t j = i + 1; j < ser.size(); ++j)
        for (int a : ser[i])
          for (int b : ser[j])
            if (!po.rel(a, b)) throw NotVsp("inconsistent series blocks");
    std::vector<Mdt> kids;
    for (auto& b : ser) kids.push_back(decompose(b));
    return Mdt::internal(true, std::move(kids));
  };
  std::vector<int> all(po.n());
  std::iota(all.begin(), all.end(), 0);
  if (po.n() == 0) throw Error("empty ground set");
  Mdt m = decompose(all);
  m.canonicalize();
  return m;
}

int vsp_depth(const Bdt& t) {
  std::function<int(int)> rec = [&](int v) -> int {
    if (t.is_leaf(v)) return 1;
    int a = rec(t.child(v, 0));
    int b = rec(t.child(v, 1));
    return t.is_s(v) ? a + b : std::max(a, b);
  };
  return rec(t.root());
}

int vsp_depth(const Mdt& m) {
  std::function<int(int)> rec = [&](int v) -> int {
    if (m.is_leaf(v)) return 1;
    int acc = m.is_s(v) ? 0 : 1;
    for (int c : m.children(v)) {
      int d = rec(c);
      acc = m.is_s(v) ? acc + d : std::max(acc, d);
    }
    return acc;
  };
  return rec(m.root());
}

ClusterSummary sp_clusters(const Bdt& t) {
  ClusterSummary out;
  std::function<int(int, bool)> cluster_size = [&](int v, bool s_type) -> int {
    // Size of the same-type cluster continuing downward from v.
    if (t.is_leaf(v) || t.is_s(v) != s_type) return 0;
    return 1 + cluster_size(t.child(v, 0), s_type) + cluster_size(t.child(v, 1), s_type);
  };
  for (int v : t.node_ids()) {
    if (t.is_leaf(v)) continue;
    int p = t.parent(v);
    bool is_cluster_root = (p < 0) || t.is_leaf(p) || t.is_s(p) != t.is_s(v);
    if (!is_cluster_root) continue;
    int size = cluster_size(v, t.is_s(v));
    (t.is_s(v) ? out.s_sizes : out.p_sizes).push_back(size);
  }
  std::sort(out.s_sizes.begin(), out.s_sizes.end());
  std::sort(out.p_sizes.begin(), out.p_sizes.end());
  return out;
}

Bdt sample_bdt_prior(const std::vector<Actor>& actors, double q, Rng& rng) {
  if (actors.empty()) throw Error("need at least one actor");
  Bdt t = Bdt::single(actors[0]);
  for (size_t k = 1; k < actors.size(); ++k) {
    // Edges of the current tree plus the virtual edge above the root:
    // one per node, 2k-3 of them at step k in the generative process.
    std::vector<int> edges = t.node_ids();
    int e = edges[rng.uniform_int(edges.size())];
    double u = rng.uniform();
    TypeDraw draw = u < q / 2 ? TypeDraw::SUp : (u < q ? TypeDraw::SDown : TypeDraw::P);
    t.insert_leaf(e, actors[k], draw);
  }
  return t;
}

Bdt sample_bdt_prior(int n, double q, Rng& rng) {
  std::vector<Actor> actors(n);
  std::iota(actors.begin(), actors.end(), 1);
  return sample_bdt_prior(actors, q, rng);
}

} // namespace vsp
