#ifndef VSP_TREE_HPP
#define VSP_TREE_HPP

#include <string>
#include <vector>

#include "vsp/error.hpp"
#include "vsp/poset.hpp"
#include "vsp/rng.hpp"

namespace vsp {

enum class TypeDraw { SUp, SDown, P };

// Binary decomposition tree. Nodes live in an index pool with a free list so
// ids stay stable across leaf insertion/deletion and regrafts. An edge is
// identified by its lower endpoint (every node except the root has a unique
// parent edge); passing the root id denotes the virtual edge above the root.
class Bdt {
public:
  struct Node {
    int parent = -1;
    int child[2] = {-1, -1};
    Actor actor = -1; // >= 0 iff leaf
    bool s_type = false;
    int upper = 0; // child slot holding the upper subtree (S nodes)
    bool alive = false;
  };

  static Bdt single(Actor a);
  static Bdt combine(bool series, const Bdt& upper, const Bdt& lower);

  int root() const { return root_; }
  int n_leaves() const { return n_; }
  bool alive(int v) const { return v >= 0 && v < static_cast<int>(nodes_.size()) && nodes_[v].alive; }
  bool is_leaf(int v) const { return nodes_[v].actor >= 0; }
  bool is_s(int v) const { return nodes_[v].s_type; }
  Actor actor(int v) const { return nodes_[v].actor; }
  int parent(int v) const { return nodes_[v].parent; }
  int child(int v, int slot) const { return nodes_[v].child[slot]; }
  int upper_child(int v) const { return nodes_[v].child[nodes_[v].upper]; }
  int lower_child(int v) const { return nodes_[v].child[1 - nodes_[v].upper]; }
  int sibling(int v) const;

  std::vector<int> node_ids() const;        // alive nodes, root first (preorder)
  std::vector<int> leaf_ids() const;
  std::vector<Actor> actors() const;        // sorted
  int find_leaf(Actor a) const;             // -1 if absent
  int subtree_leaf_count(int v) const;
  bool in_subtree(int top, int v) const;    // v inside subtree rooted at top

  // Number of internal S nodes.
  int s_count() const;

  // Insert a new leaf for `actor` into the edge above `edge_child`
  // (edge_child == root() targets the virtual edge). Returns the new
  // internal node id.
  int insert_leaf(int edge_child, Actor a, TypeDraw draw);
  void delete_leaf(Actor a);

  // Subtree prune and regraft: move the edge above `edge_child` into the edge
  // above `target` (a node of the pruned tree). The stacking of the moved
  // internal node is re-drawn uniformly when it is an S node.
  void regraft(int edge_child, int target, Rng& rng);
  // Nodes of the pruned tree, i.e. valid regraft targets for edge_child.
  std::vector<int> regraft_targets(int edge_child) const;
  // Targets whose edges neighbor the vacated edge in the pruned tree.
  std::vector<int> local_regraft_targets(int edge_child) const;

  // True iff the actor's leaf sits on the upper side of every S ancestor.
  bool pred_free(Actor a) const;
  bool succ_free(Actor a) const;

  void flip_type(int v, Rng& rng); // P <-> S; stacking drawn when turning S
  void set_type(int v, bool s, int upper_slot);

  void validate() const; // throws Error on any broken invariant

  std::string canonical_string() const; // typed-tree identity
  std::string topology_string() const;  // types and stacking ignored

private:
  int new_node();
  void free_node(int v);
  void canon(int v, std::string& out, bool with_types) const;

  std::vector<Node> nodes_;
  std::vector<int> free_;
  int root_ = -1;
  int n_ = 0;
};

// Multi decomposition tree: internal nodes have >= 2 children and adjacent
// internal nodes alternate in type; canonical (one per VSP).
class Mdt {
public:
  struct Node {
    int parent = -1;
    std::vector<int> children; // S: stacking order, top first
    Actor actor = -1;
    bool s_type = false;
    bool alive = false;
  };

  static Mdt single(Actor a);
  static Mdt internal(bool series, std::vector<Mdt> children);

  int root() const { return root_; }
  int n_leaves() const { return n_; }
  bool alive(int v) const { return v >= 0 && v < static_cast<int>(nodes_.size()) && nodes_[v].alive; }
  bool is_leaf(int v) const { return nodes_[v].actor >= 0; }
  bool is_s(int v) const { return nodes_[v].s_type; }
  Actor actor(int v) const { return nodes_[v].actor; }
  int parent(int v) const { return nodes_[v].parent; }
  const std::vector<int>& children(int v) const { return nodes_[v].children; }

  std::vector<int> node_ids() const;
  std::vector<int> internal_ids() const;
  std::vector<Actor> actors() const;
  int find_leaf(Actor a) const;
  int subtree_leaf_count(int v) const;
  bool in_subtree(int top, int v) const;

  // Restriction: remove the actor and restore the MDT invariant by splicing
  // out degree-1 parents and merging equal-type adjacencies.
  void delete_leaf(Actor a);

  bool pred_free(Actor a) const;
  bool succ_free(Actor a) const;

  // Order P children by minimum contained actor (S order is meaningful and
  // kept as is). Needed for a canonical form.
  void canonicalize();
  std::string canonical_string() const;

  void validate() const;

  // Mutators used by the MCMC edge operation (tree.cpp keeps them narrow).
  void detach_child(int p, int c);
  void attach_child(int p, int c, int position); // position within stacking
  int new_internal(bool s_type);
  void replace_child(int p, int old_child, int new_child);
  void set_root(int v) { root_ = v; nodes_[v].parent = -1; }
  void free_internal(int v);
  void set_s_type(int v, bool s) { nodes_[v].s_type = s; }

private:
  int new_node();
  void free_node(int v);
  Actor min_actor(int v) const;
  void canon(int v, std::string& out) const;

  std::vector<Node> nodes_;
  std::vector<int> free_;
  int root_ = -1;
  int n_ = 0;
};

PartialOrder bdt_to_vsp(const Bdt& t);
PartialOrder mdt_to_vsp(const Mdt& m);
Mdt bdt_collapse_to_mdt(const Bdt& t);
// Series/parallel decomposition of a VSP; throws NotVsp.
Mdt vsp_to_mdt(const PartialOrder& po);

// Depth of the represented VSP straight off the tree (S: sum, P: max).
int vsp_depth(const Bdt& t);
int vsp_depth(const Mdt& m);

struct ClusterSummary {
  std::vector<int> s_sizes;
  std::vector<int> p_sizes;
};
ClusterSummary sp_clusters(const Bdt& t);

Bdt sample_bdt_prior(const std::vector<Actor>& actors, double q, Rng& rng);
Bdt sample_bdt_prior(int n, double q, Rng& rng); // actors 1..n

} // namespace vsp

#endif
