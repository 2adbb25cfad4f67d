#include "vsp/prior.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "vsp/error.hpp"
#include "vsp/poset.hpp"

namespace vsp {

namespace {

const double kNegInf = -std::numeric_limits<double>::infinity();

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double x) { return std::log(x) - std::log1p(-x); }

double normal_log_pdf(double x, double mu, double sd) {
  double z = (x - mu) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * M_PI);
}

double normal_cdf(double x, double mu, double sd) {
  return 0.5 * std::erfc(-(x - mu) / (sd * std::sqrt(2.0)));
}

// x^k in log space with the 0^0 = 1 convention.
double log_pow(double x, long k) {
  if (k == 0) return 0.0;
  return x > 0.0 ? k * std::log(x) : kNegInf;
}

} // namespace

double ScalarPrior::log_density(double x) const {
  if (!(x > 0.0 && x < 1.0)) throw OutOfSupport("value outside (0,1)");
  switch (kind) {
    case Kind::Uniform: {
      if (x < a || x > b) return kNegInf;
      return -std::log(b - a);
    }
    case Kind::LogisticNormal:
      return normal_log_pdf(logit(x), a, b) - std::log(x) - std::log1p(-x);
  }
  return kNegInf;
}

double ScalarPrior::sample(Rng& rng) const {
  switch (kind) {
    case Kind::Uniform:
      return a + (b - a) * rng.uniform();
    case Kind::LogisticNormal:
      return logistic(rng.normal(a, b));
  }
  return 0.5;
}

double ScalarPrior::mass(double lo, double hi) const {
  lo = std::max(lo, 0.0);
  hi = std::min(hi, 1.0);
  if (hi <= lo) return 0.0;
  switch (kind) {
    case Kind::Uniform: {
      double l = std::max(lo, a), h = std::min(hi, b);
      return h > l ? (h - l) / (b - a) : 0.0;
    }
    case Kind::LogisticNormal: {
      double zl = lo <= 0.0 ? -std::numeric_limits<double>::infinity() : logit(lo);
      double zh = hi >= 1.0 ? std::numeric_limits<double>::infinity() : logit(hi);
      return normal_cdf(zh, a, b) - normal_cdf(zl, a, b);
    }
  }
  return 0.0;
}

double bdt_log_prior(const Bdt& t, double q) {
  long n = t.n_leaves();
  long s = t.s_count();
  return log_pow(q / 2.0, s) + log_pow(1.0 - q, n - 1 - s) - log_big(tree_topology_count(n));
}

BigInt bdt_multiplicity(const Bdt& t) {
  ClusterSummary cs = sp_clusters(t);
  BigInt acc = 1;
  for (int k : cs.p_sizes) acc *= odd_double_factorial(k);
  for (int k : cs.s_sizes) acc *= catalan(static_cast<unsigned long>(k));
  return acc;
}

BigInt bdt_multiplicity(const Mdt& m) {
  BigInt acc = 1;
  for (int v : m.internal_ids()) {
    long c = static_cast<long>(m.children(v).size());
    if (m.is_s(v))
      acc *= catalan(static_cast<unsigned long>(c - 1));
    else
      acc *= odd_double_factorial(c - 1);
  }
  return acc;
}

double vsp_log_prior(const Mdt& m, double q) {
  long n = m.n_leaves();
  double acc = -log_big(tree_topology_count(n));
  for (int v : m.internal_ids()) {
    long c = static_cast<long>(m.children(v).size());
    if (m.is_s(v)) {
      acc += log_pow(q / 2.0, c - 1) + log_big(catalan(static_cast<unsigned long>(c - 1)));
    } else {
      acc += log_pow(1.0 - q, c - 1) + log_big(odd_double_factorial(c - 1));
    }
  }
  return acc;
}

namespace {

// Relabel actors by rank so that orders over different label sets compare.
PartialOrder relabel_by_rank(const PartialOrder& po) {
  std::vector<Actor> sorted = po.labels();
  std::sort(sorted.begin(), sorted.end());
  std::map<Actor, Actor> rank;
  for (size_t i = 0; i < sorted.size(); ++i) rank[sorted[i]] = static_cast<Actor>(i + 1);
  std::vector<Actor> labels;
  for (Actor a : po.labels()) labels.push_back(rank[a]);
  return PartialOrder(po.relation(), labels);
}

std::map<std::string, double> vsp_prior_table(int n, double q) {
  std::map<std::string, double> out;
  for (const PartialOrder& po : enumerate_posets(n)) {
    if (!is_vsp(po)) continue;
    out[po.closure_key()] = std::exp(vsp_log_prior(vsp_to_mdt(po), q));
  }
  return out;
}

} // namespace

double check_marginal_consistency(int n, double q) {
  if (n > 5) throw OracleBoundExceeded("marginal consistency check limited to n <= 5");
  if (n < 2) return 0.0;
  std::vector<PartialOrder> full;
  for (const PartialOrder& po : enumerate_posets(n))
    if (is_vsp(po)) full.push_back(po);
  std::map<std::string, double> small = vsp_prior_table(n - 1, q);

  double worst = 0.0;
  for (int drop = 1; drop <= n; ++drop) {
    ActorSubset keep;
    for (int a = 1; a <= n; ++a)
      if (a != drop) keep.push_back(a);
    std::map<std::string, double> marg;
    for (const PartialOrder& po : full) {
      PartialOrder w = relabel_by_rank(restrict_to(po, keep));
      marg[w.closure_key()] += std::exp(vsp_log_prior(vsp_to_mdt(po), q));
    }
    for (const auto& [key, prior] : small)
      worst = std::max(worst, std::abs(prior - (marg.count(key) ? marg.at(key) : 0.0)));
    for (const auto& [key, mass] : marg)
      if (!small.count(key)) worst = std::max(worst, mass);
  }
  return worst;
}

void HyperPriorSpec::validate() const {
  auto check = [](const ScalarPrior& sp, const char* what) {
    if (sp.kind == ScalarPrior::Kind::LogisticNormal && sp.b <= 0.0)
      throw Error(std::string(what) + ": sd must be > 0");
    if (sp.kind == ScalarPrior::Kind::Uniform && !(sp.b > sp.a))
      throw Error(std::string(what) + ": need hi > lo");
  };
  if (eta_sd <= 0.0) throw Error("eta_sd must be > 0");
  check(p_prior, "p prior");
  check(phi_prior, "phi prior");
}

double hyper_log_prior(const Hyperparams& h, const HyperPriorSpec& spec) {
  return spec.q_prior().log_density(h.q) + spec.p_prior.log_density(h.p) +
         spec.phi_prior.log_density(h.phi);
}

Hyperparams sample_hyper(const HyperPriorSpec& spec, Rng& rng) {
  Hyperparams h;
  h.q = spec.q_prior().sample(rng);
  h.p = spec.p_prior.sample(rng);
  h.phi = spec.phi_prior.sample(rng);
  return h;
}

std::vector<double> prior_depth_histogram(int n, const HyperPriorSpec& spec, long draws, Rng& rng) {
  if (draws < 1) throw Error("draws must be >= 1");
  std::vector<double> hist(n, 0.0);
  for (long k = 0; k < draws; ++k) {
    double q = spec.q_prior().sample(rng);
    Bdt t = sample_bdt_prior(n, q, rng);
    hist[vsp_depth(t) - 1] += 1.0;
  }
  for (double& h : hist) h /= static_cast<double>(draws);
  return hist;
}

} // namespace vsp
