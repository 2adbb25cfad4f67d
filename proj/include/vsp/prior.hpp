#ifndef VSP_PRIOR_HPP
#define VSP_PRIOR_HPP

#include <vector>

#include "vsp/bigint.hpp"
#include "vsp/rng.hpp"
#include "vsp/tree.hpp"

namespace vsp {

struct Hyperparams {
  double q = 0.5;   // probability of an S node
  double p = 0.1;   // queue-jump error probability
  double phi = 0.5; // top-vs-bottom placement probability
};

// Density on (0,1) for a hyperparameter.
struct ScalarPrior {
  enum class Kind { LogisticNormal, Uniform };
  Kind kind = Kind::Uniform;
  double a = 0.0; // mean of the latent normal / lower bound
  double b = 1.0; // sd of the latent normal / upper bound

  static ScalarPrior logistic_normal(double mean, double sd) {
    return {Kind::LogisticNormal, mean, sd};
  }
  static ScalarPrior uniform01() { return {Kind::Uniform, 0.0, 1.0}; }

  double log_density(double x) const;
  double sample(Rng& rng) const;
  double mass(double lo, double hi) const; // probability of (lo, hi)
};

struct HyperPriorSpec {
  double eta_mean = 1.0; // q = logistic(eta), eta ~ N(eta_mean, eta_sd)
  double eta_sd = 1.5;
  ScalarPrior p_prior = ScalarPrior::logistic_normal(0.0, 1.5);
  ScalarPrior phi_prior = ScalarPrior::uniform01();

  ScalarPrior q_prior() const { return ScalarPrior::logistic_normal(eta_mean, eta_sd); }
  void validate() const;
};

double bdt_log_prior(const Bdt& t, double q);

// Number of BDTs representing the tree's VSP.
BigInt bdt_multiplicity(const Bdt& t);
BigInt bdt_multiplicity(const Mdt& m);

// Closed-form VSP prior evaluated from the MDT's per-node factors.
double vsp_log_prior(const Mdt& m, double q);

// Exhaustive check of the marginal-consistency identity for all single-actor
// removals; returns the maximum residual. n <= 5.
double check_marginal_consistency(int n, double q);

double hyper_log_prior(const Hyperparams& h, const HyperPriorSpec& spec);
Hyperparams sample_hyper(const HyperPriorSpec& spec, Rng& rng);

// Monte Carlo prior mass over depths 1..n (index d-1).
std::vector<double> prior_depth_histogram(int n, const HyperPriorSpec& spec, long draws, Rng& rng);

} // namespace vsp

#endif
