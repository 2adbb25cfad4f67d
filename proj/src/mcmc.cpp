#include "vsp/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vsp/counting.hpp"
#include "vsp/error.hpp"
#include "vsp/poset.hpp"

namespace vsp {

namespace {

const double kNegInf = -std::numeric_limits<double>::infinity();

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double x) { return std::log(x) - std::log1p(-x); }

} // namespace

std::string param_name(Param p) { return p == Param::BDT ? "bdt" : "mdt"; }

Param param_from_name(const std::string& s) {
  if (s == "bdt") return Param::BDT;
  if (s == "mdt") return Param::MDT;
  throw Error("unknown parameterization '" + s + "'");
}

void McmcConfig::validate() const {
  if (iterations <= burn_in || burn_in < 0) throw Error("need iterations > burn_in >= 0");
  if (thin < 1) throw Error("thin must be >= 1");
  if (local_per_global < 0) throw Error("local_per_global must be >= 0");
  if (step_q <= 0 || step_p <= 0 || step_phi <= 0) throw Error("step sizes must be > 0");
}

// ---------------------------------------------------------------------------
// MDT edge operation

MdtMoveOutcome apply_mdt_edge_move(Mdt& m, int c, int target, Rng& rng) {
  MdtMoveOutcome out;
  int p = m.parent(c);
  if (p < 0) return out;
  if (target != -1 && m.in_subtree(c, target)) return out; // would disconnect

  int real_nodes_before = static_cast<int>(m.node_ids().size());
  bool p_was_root = (m.parent(p) == -1);
  int old_root = m.root();

  double case_fwd;
  if (target == -1) {
    case_fwd = m.is_s(old_root) ? 1.0 : 0.5;
  } else if (m.is_leaf(target)) {
    case_fwd = m.is_s(m.parent(target)) ? 1.0 : 0.5;
  } else {
    case_fwd = m.is_s(target) ? 1.0 / (static_cast<double>(m.children(target).size()) + 1.0)
                              : 1.0;
  }

  // Capture structural references before editing.
  int target_parent = (target != -1 && m.parent(target) >= 0) ? m.parent(target) : -1;

  m.detach_child(p, c);

  if (target == -1) {
    int j = m.new_internal(!m.is_s(old_root));
    // j roots the tree with children {old root, c}.
    int pos = 0;
    if (m.is_s(j)) pos = static_cast<int>(rng.uniform_int(2));
    m.set_root(j);
    m.attach_child(j, old_root, 0);
    m.attach_child(j, c, pos == 0 ? 0 : 1);
  } else if (m.is_leaf(target)) {
    int par_t = target_parent;
    if (par_t < 0) return out; // a leaf root cannot happen for n >= 2
    int j = m.new_internal(!m.is_s(par_t));
    m.replace_child(par_t, target, j);
    int pos = m.is_s(j) ? static_cast<int>(rng.uniform_int(2)) : 0;
    m.attach_child(j, target, 0);
    m.attach_child(j, c, pos == 0 ? 0 : 1);
  } else {
    int pos = m.is_s(target)
                  ? static_cast<int>(rng.uniform_int(m.children(target).size() + 1))
                  : static_cast<int>(m.children(target).size());
    m.attach_child(target, c, pos);
  }

  // Splice out the source parent if it dropped to one child.
  int spliced_child = -1;
  if (m.alive(p) && m.children(p).size() == 1) {
    spliced_child = m.children(p)[0];
    int g = m.parent(p);
    m.detach_child(p, spliced_child);
    if (g < 0) {
      m.set_root(spliced_child);
    } else {
      m.replace_child(g, p, spliced_child);
    }
    m.free_internal(p);
  }

  try {
    m.validate();
  } catch (const Error&) {
    return out; // inadmissible: broken alternation or arity
  }

  double case_rev;
  if (m.alive(p)) {
    case_rev = m.is_s(p) ? 1.0 / (static_cast<double>(m.children(p).size()) + 1.0) : 1.0;
  } else if (p_was_root) {
    case_rev = m.is_s(m.root()) ? 1.0 : 0.5;
  } else {
    // The spliced child survived next to an opposite-type parent, so it is a
    // leaf; the reverse re-creates the dissolved node in its parent edge.
    case_rev = m.is_s(m.parent(spliced_child)) ? 1.0 : 0.5;
  }

  int real_nodes_after = static_cast<int>(m.node_ids().size());
  out.admissible = true;
  out.log_rho_fwd = -2.0 * std::log(real_nodes_before - 1) + std::log(case_fwd);
  out.log_rho_rev = -2.0 * std::log(real_nodes_after - 1) + std::log(case_rev);
  return out;
}

// ---------------------------------------------------------------------------
// Sampler

Sampler::Sampler(const RankDataset& data, const McmcConfig& cfg, const HyperPriorSpec& priors,
                 Rng rng)
    : data_(data), cfg_(cfg), priors_(priors), rng_(rng), n_(0) {
  cfg_.validate();
  priors_.validate();
  std::vector<Actor> actors = data.actor_ids();
  if (actors.empty()) throw Error("dataset declares no actors");
  n_ = static_cast<int>(actors.size());
  for (const RankList& l : data.lists) {
    for (Actor a : l.ordering)
      if (!data.has_actor(a)) throw UnknownActorId("list actor " + std::to_string(a));
  }
  // Overdispersed start: hyperparameters from their priors, tree from the
  // tree prior at the drawn q.
  hyper_ = sample_hyper(priors_, rng_);
  if (cfg_.model != Model::QJB) hyper_.phi = (cfg_.model == Model::QJU) ? 1.0 : 0.0;
  Bdt t = sample_bdt_prior(actors, hyper_.q, rng_);
  if (cfg_.param == Param::BDT)
    set_tree(t);
  else
    set_tree(bdt_collapse_to_mdt(t));
}

void Sampler::set_tree(const Bdt& t) {
  if (cfg_.param != Param::BDT) throw Error("sampler is MDT-parameterized");
  bdt_ = t;
  refresh_caches();
}

void Sampler::set_tree(const Mdt& m) {
  if (cfg_.param != Param::MDT) throw Error("sampler is BDT-parameterized");
  mdt_ = m;
  mdt_.canonicalize();
  refresh_caches();
}

void Sampler::set_hyper(const Hyperparams& h) {
  hyper_ = h;
  lik_memo_.clear();
  refresh_caches();
}

Mdt Sampler::canonical_tree() const {
  if (cfg_.param == Param::BDT) {
    Mdt m = bdt_collapse_to_mdt(bdt_);
    m.canonicalize();
    return m;
  }
  return mdt_;
}

double Sampler::tree_prior_at(double q) const {
  return cfg_.param == Param::BDT ? bdt_log_prior(bdt_, q) : vsp_log_prior(mdt_, q);
}

DatasetLogLik Sampler::eval_lik(const Mdt& m, double p, double phi) const {
  return dataset_log_lik(data_, m, cfg_.model, p, phi);
}

const DatasetLogLik& Sampler::lik_for_key(const std::string& key, const Mdt& m) {
  auto it = lik_memo_.find(key);
  if (it != lik_memo_.end()) return it->second;
  if (lik_memo_.size() > 20000) lik_memo_.clear();
  return lik_memo_.emplace(key, eval_lik(m, hyper_.p, hyper_.phi)).first->second;
}

void Sampler::refresh_caches() {
  Mdt canon = canonical_tree();
  vsp_key_ = canon.canonical_string();
  log_tree_prior_ = tree_prior_at(hyper_.q);
  lik_ = eval_lik(canon, hyper_.p, hyper_.phi);
  lik_memo_.clear();
  lik_memo_[vsp_key_] = lik_;
}

void Sampler::check_cache_coherence(double tol) const {
  // Release-mode sampling point for the state invariants too.
  if (cfg_.param == Param::BDT)
    bdt_.validate();
  else
    mdt_.validate();
  Mdt canon = canonical_tree();
  double lp = tree_prior_at(hyper_.q);
  DatasetLogLik ll = eval_lik(canon, hyper_.p, hyper_.phi);
  if (std::abs(lp - log_tree_prior_) > tol || std::abs(ll.total - lik_.total) > tol)
    throw Error("cached log posterior drifted from fresh recomputation");
}

void Sampler::type_flip() {
  if (cfg_.param != Param::BDT) return;
  if (n_ < 2) return;
  stats_.type_flip.proposed++;
  std::vector<int> internals;
  for (int v : bdt_.node_ids())
    if (!bdt_.is_leaf(v)) internals.push_back(v);
  int v = internals[rng_.uniform_int(internals.size())];

  Bdt proposal = bdt_;
  bool to_s = !bdt_.is_s(v);
  proposal.flip_type(v, rng_);
  // P->S proposes one of two stackings, S->P is deterministic: factors 2, 1/2.
  double log_asym = to_s ? std::log(2.0) : -std::log(2.0);

  Mdt canon = bdt_collapse_to_mdt(proposal);
  canon.canonicalize();
  std::string key = canon.canonical_string();
  double lp = bdt_log_prior(proposal, hyper_.q);
  const DatasetLogLik& ll = (key == vsp_key_) ? lik_ : lik_for_key(key, canon);
  double log_acc = log_asym + lp + ll.total - log_tree_prior_ - lik_.total;
  if (std::log(rng_.uniform()) <= log_acc) {
    stats_.type_flip.accepted++;
    bdt_ = proposal;
    vsp_key_ = key;
    log_tree_prior_ = lp;
    lik_ = ll;
#ifndef NDEBUG
    bdt_.validate();
#endif
  }
}

void Sampler::edge_move(bool global) {
  if (cfg_.param != Param::BDT) return;
  if (n_ < 3) return; // no topology-changing regraft exists below 3 leaves
  AcceptCounter& ctr = global ? stats_.edge_global : stats_.edge_local;
  ctr.proposed++;

  std::vector<int> movable;
  for (int v : bdt_.node_ids())
    if (v != bdt_.root()) movable.push_back(v);
  int e = movable[rng_.uniform_int(movable.size())];

  double log_fwd_choices = 0.0, log_rev_choices = 0.0;
  Bdt proposal = bdt_;
  if (global) {
    std::vector<int> targets = bdt_.regraft_targets(e);
    if (targets.empty()) return;
    int tgt = targets[rng_.uniform_int(targets.size())];
    proposal.regraft(e, tgt, rng_);
    // Pruned-tree size is invariant, so the global proposal is symmetric.
  } else {
    std::vector<int> targets = bdt_.local_regraft_targets(e);
    if (targets.empty()) return;
    int tgt = targets[rng_.uniform_int(targets.size())];
    proposal.regraft(e, tgt, rng_);
    log_fwd_choices = -std::log(static_cast<double>(targets.size()));
    log_rev_choices = -std::log(static_cast<double>(proposal.local_regraft_targets(e).size()));
  }

  Mdt canon = bdt_collapse_to_mdt(proposal);
  canon.canonicalize();
  std::string key = canon.canonical_string();
  // Edge moves keep S(t) fixed, so the tree prior cancels.
  const DatasetLogLik& ll = (key == vsp_key_) ? lik_ : lik_for_key(key, canon);
  double log_acc = ll.total - lik_.total + log_rev_choices - log_fwd_choices;
  if (std::log(rng_.uniform()) <= log_acc) {
    ctr.accepted++;
    bdt_ = proposal;
    vsp_key_ = key;
    lik_ = ll;
#ifndef NDEBUG
    bdt_.validate();
#endif
  }
}

void Sampler::mdt_edge_move() {
  if (cfg_.param != Param::MDT) return;
  if (n_ < 2) return;
  stats_.mdt_edge.proposed++;

  std::vector<int> nodes = mdt_.node_ids();
  std::vector<int> movable;
  for (int v : nodes)
    if (v != mdt_.root()) movable.push_back(v);
  if (movable.empty()) return;
  int c = movable[rng_.uniform_int(movable.size())];
  int p = mdt_.parent(c);
  // Candidate targets: every other node plus the virtual node above the root.
  std::vector<int> candidates{-1};
  for (int v : nodes)
    if (v != c && v != p) candidates.push_back(v);
  int target = candidates[rng_.uniform_int(candidates.size())];

  Mdt proposal = mdt_;
  MdtMoveOutcome mv = apply_mdt_edge_move(proposal, c, target, rng_);
  if (!mv.admissible) return; // rejected without ratio evaluation

  proposal.canonicalize();
  std::string key = proposal.canonical_string();
  double lp = vsp_log_prior(proposal, hyper_.q);
  const DatasetLogLik& ll = (key == vsp_key_) ? lik_ : lik_for_key(key, proposal);
  double log_acc =
      lp + ll.total + mv.log_rho_rev - log_tree_prior_ - lik_.total - mv.log_rho_fwd;
  if (std::log(rng_.uniform()) <= log_acc) {
    stats_.mdt_edge.accepted++;
    mdt_ = proposal;
    vsp_key_ = key;
    log_tree_prior_ = lp;
    lik_ = ll;
#ifndef NDEBUG
    mdt_.validate();
#endif
  }
}

void Sampler::update_q() {
  stats_.upd_q.proposed++;
  double q = hyper_.q;
  double qp = logistic(logit(q) + rng_.normal(0.0, cfg_.step_q));
  if (!(qp > 0.0 && qp < 1.0)) return;
  ScalarPrior prior = priors_.q_prior();
  // The likelihood is q-free; the target is tree prior x hyperprior, with the
  // logit-walk Jacobian q(1-q).
  double log_acc = tree_prior_at(qp) + prior.log_density(qp) + std::log(qp) + std::log1p(-qp) -
                   (log_tree_prior_ + prior.log_density(q) + std::log(q) + std::log1p(-q));
  if (std::log(rng_.uniform()) <= log_acc) {
    stats_.upd_q.accepted++;
    hyper_.q = qp;
    log_tree_prior_ = tree_prior_at(qp);
  }
}

void Sampler::update_p() {
  stats_.upd_p.proposed++;
  double p = hyper_.p;
  double pp = logistic(logit(p) + rng_.normal(0.0, cfg_.step_p));
  if (!(pp > 0.0 && pp < 1.0)) return;
  Mdt canon = canonical_tree();
  DatasetLogLik ll = eval_lik(canon, pp, hyper_.phi);
  double log_acc = ll.total + priors_.p_prior.log_density(pp) + std::log(pp) + std::log1p(-pp) -
                   (lik_.total + priors_.p_prior.log_density(p) + std::log(p) + std::log1p(-p));
  if (std::log(rng_.uniform()) <= log_acc) {
    stats_.upd_p.accepted++;
    hyper_.p = pp;
    lik_ = ll;
    lik_memo_.clear();
    lik_memo_[vsp_key_] = lik_;
  }
}

void Sampler::update_phi() {
  if (cfg_.model != Model::QJB) return; // phi is fixed and unused otherwise
  stats_.upd_phi.proposed++;
  double phi = hyper_.phi;
  double fp = logistic(logit(phi) + rng_.normal(0.0, cfg_.step_phi));
  if (!(fp > 0.0 && fp < 1.0)) return;
  Mdt canon = canonical_tree();
  DatasetLogLik ll = eval_lik(canon, hyper_.p, fp);
  double log_acc =
      ll.total + priors_.phi_prior.log_density(fp) + std::log(fp) + std::log1p(-fp) -
      (lik_.total + priors_.phi_prior.log_density(phi) + std::log(phi) + std::log1p(-phi));
  if (std::log(rng_.uniform()) <= log_acc) {
    stats_.upd_phi.accepted++;
    hyper_.phi = fp;
    lik_ = ll;
    lik_memo_.clear();
    lik_memo_[vsp_key_] = lik_;
  }
}

void Sampler::sweep() {
  long locals = cfg_.local_per_global > 0 ? cfg_.local_per_global : n_;
  if (cfg_.param == Param::BDT) {
    // 1 global edge operation for every `locals` local ones, plus a type flip.
    for (long i = 0; i < locals; ++i) edge_move(false);
    edge_move(true);
    type_flip();
  } else {
    for (long i = 0; i < locals + 1; ++i) mdt_edge_move();
  }
  update_q();
  update_p();
  update_phi();
}

ChainTrace run_chain(const RankDataset& data, const McmcConfig& cfg, const HyperPriorSpec& priors,
                     const std::function<void(const TraceSample&)>& on_sample) {
  cfg.validate();
  Sampler sampler(data, cfg, priors, Rng(cfg.seed));
  ChainTrace trace;
  trace.config = cfg;
  trace.actors = data.actor_ids();
  for (long it = 1; it <= cfg.iterations; ++it) {
    sampler.sweep();
    if (it % 1000 == 0) sampler.check_cache_coherence();
    if (it > cfg.burn_in && (it - cfg.burn_in) % cfg.thin == 0) {
      TraceSample s;
      s.tree = sampler.canonical_tree();
      s.q = sampler.hyper().q;
      s.p = sampler.hyper().p;
      s.phi = sampler.hyper().phi;
      s.log_prior = sampler.log_tree_prior();
      s.log_lik = sampler.lik().total;
      s.per_list = sampler.lik().per_list;
      if (on_sample) on_sample(s);
      trace.samples.push_back(std::move(s));
    }
  }
  trace.accept = sampler.stats();
  return trace;
}

ExactPosterior exact_posterior(const RankDataset& data, double q, double p, double phi,
                               Model model) {
  std::vector<Actor> actors = data.actor_ids();
  int n = static_cast<int>(actors.size());
  if (n > 4) throw OracleBoundExceeded("exact posterior limited to n <= 4");
  ExactPosterior out;
  std::vector<double> log_w;
  for (const PartialOrder& po : enumerate_posets(n)) {
    if (!is_vsp(po)) continue;
    // Relabel 1..n onto the dataset's actual actor ids.
    std::vector<Actor> labels;
    for (Actor a : po.labels()) labels.push_back(actors[a - 1]);
    PartialOrder relabeled(po.relation(), labels);
    Mdt m = vsp_to_mdt(relabeled);
    double lw = vsp_log_prior(m, q) + dataset_log_lik(data, m, model, p, phi).total;
    out.trees.push_back(std::move(m));
    log_w.push_back(lw);
  }
  double mx = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  for (double lw : log_w) total += std::exp(lw - mx);
  for (double lw : log_w) out.probs.push_back(std::exp(lw - mx) / total);
  return out;
}

} // namespace vsp
