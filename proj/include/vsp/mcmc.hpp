#ifndef VSP_MCMC_HPP
#define VSP_MCMC_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vsp/observation.hpp"
#include "vsp/prior.hpp"
#include "vsp/rng.hpp"
#include "vsp/tree.hpp"

namespace vsp {

enum class Param { BDT, MDT };

std::string param_name(Param p);
Param param_from_name(const std::string& s);

struct McmcConfig {
  long iterations = 20000; // sweeps
  long burn_in = 4000;
  long thin = 10;
  uint64_t seed = 1;
  // Local edge moves per global one within a sweep; 0 means "actor count".
  long local_per_global = 0;
  double step_q = 0.5; // random-walk sd on the logit scale
  double step_p = 0.5;
  double step_phi = 0.5;
  Param param = Param::BDT;
  Model model = Model::QJU;

  void validate() const;
};

struct AcceptCounter {
  long proposed = 0;
  long accepted = 0;
  double rate() const { return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0; }
};

struct AcceptStats {
  AcceptCounter type_flip, edge_global, edge_local, mdt_edge, upd_q, upd_p, upd_phi;
};

struct TraceSample {
  Mdt tree; // canonical MDT regardless of the sampler parameterization
  double q = 0.0, p = 0.0, phi = 0.0;
  double log_prior = 0.0; // tree prior at the recorded q
  double log_lik = 0.0;
  std::vector<double> per_list;
};

struct ChainTrace {
  McmcConfig config;
  std::vector<Actor> actors;
  std::string data_hash;
  std::vector<TraceSample> samples;
  AcceptStats accept;
};

// One MCMC chain with exclusive ownership of its tree. Public move methods
// exist so single updates can be exercised directly.
class Sampler {
public:
  Sampler(const RankDataset& data, const McmcConfig& cfg, const HyperPriorSpec& priors,
          Rng rng);

  void type_flip();            // BDT internal node type update
  void edge_move(bool global); // BDT subtree prune and regraft
  void mdt_edge_move();        // MDT edge operation
  void update_q();
  void update_p();
  void update_phi();
  void sweep();

  // Fresh recomputation of the cached prior and likelihood; throws if the
  // caches drifted beyond tol.
  void check_cache_coherence(double tol = 1e-9) const;

  const Bdt& bdt() const { return bdt_; }
  const Mdt& mdt() const { return mdt_; }
  Mdt canonical_tree() const;
  const Hyperparams& hyper() const { return hyper_; }
  double log_tree_prior() const { return log_tree_prior_; }
  const DatasetLogLik& lik() const { return lik_; }
  AcceptStats& stats() { return stats_; }

  void set_tree(const Bdt& t);
  void set_tree(const Mdt& m);
  void set_hyper(const Hyperparams& h);

private:
  double tree_prior_at(double q) const;
  const DatasetLogLik& lik_for_key(const std::string& key, const Mdt& m);
  DatasetLogLik eval_lik(const Mdt& m, double p, double phi) const;
  void refresh_caches();

  const RankDataset& data_;
  McmcConfig cfg_;
  HyperPriorSpec priors_;
  Rng rng_;
  int n_;

  Bdt bdt_;
  Mdt mdt_;
  Hyperparams hyper_;
  std::string vsp_key_;
  double log_tree_prior_ = 0.0;
  DatasetLogLik lik_;
  AcceptStats stats_;
  std::unordered_map<std::string, DatasetLogLik> lik_memo_;
};

// The MDT subtree prune-and-regraft proposal: moves the edge above `c` onto
// `target` (-1 addresses the virtual node above the root). Applied in place;
// when the result is inadmissible the tree is left in an undefined state and
// the caller discards it. Forward and reverse proposal log densities cover
// the case factors, edge pick and target pick.
struct MdtMoveOutcome {
  bool admissible = false;
  double log_rho_fwd = 0.0;
  double log_rho_rev = 0.0;
};
MdtMoveOutcome apply_mdt_edge_move(Mdt& m, int c, int target, Rng& rng);

// Runs the configured chain; per-list log likelihoods are recorded for every
// retained sample. `on_sample` (optional) streams samples as they are kept.
ChainTrace run_chain(const RankDataset& data, const McmcConfig& cfg, const HyperPriorSpec& priors,
                     const std::function<void(const TraceSample&)>& on_sample = {});

// Brute-force posterior over all VSPs at fixed hyperparameters; n <= 4.
struct ExactPosterior {
  std::vector<Mdt> trees;
  std::vector<double> probs;
};
ExactPosterior exact_posterior(const RankDataset& data, double q, double p, double phi,
                               Model model);

} // namespace vsp

#endif
