#ifndef VSP_ANALYSIS_HPP
#define VSP_ANALYSIS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vsp/mcmc.hpp"
#include "vsp/poset.hpp"

namespace vsp {

struct EdgeMarginals {
  std::vector<Actor> actors; // sorted
  int n = 0;
  std::vector<double> m; // n*n row-major, m[i*n+j] = P(i > j | y)
  size_t samples = 0;

  double at(int i, int j) const { return m[static_cast<size_t>(i) * n + j]; }
};

EdgeMarginals edge_marginals(const ChainTrace& trace);

struct ConsensusOrder {
  std::vector<Actor> actors;
  std::vector<Edge> weak_retained;  // m > eps_weak, raw
  std::vector<Edge> strong_retained;
  std::vector<Edge> weak_display; // transitive reduction of the closure
  std::vector<Edge> strong_display;
  std::vector<std::vector<int>> cycles; // SCCs of size > 1 among weak edges
  double eps_weak = 0.5;
  double eps_strong = 0.9;
};

// Throws InconsistentConsensus when the retained edges contain a 2-cycle;
// longer cycles are reported in `cycles` and left out of the display edges.
ConsensusOrder consensus_order(const EdgeMarginals& marg, double eps_weak = 0.5,
                               double eps_strong = 0.9);

struct GroupRank {
  double mean = 0.0;
  double std_err = 0.0;
};

// rank_i(v) = 1 + number of actors above i in the closure; per-sample group
// averages, then the Monte Carlo mean and standard error over samples.
std::map<std::string, GroupRank> average_rank(const ChainTrace& trace,
                                              const std::map<Actor, std::string>& grouping);

// Posterior mass over depths 1..n (index d-1).
std::vector<double> depth_posterior(const ChainTrace& trace);

struct WaicResult {
  double elpd = 0.0;
  double se = 0.0;
  double p_waic = 0.0;
};

// pointwise[k][i] = log p(y_i | theta_k); K x N.
WaicResult waic_elpd(const std::vector<std::vector<double>>& pointwise);

struct BoundaryEstimate {
  std::optional<double> value;
  std::optional<double> upper_bound; // set when no samples fall in the window
};

struct SavageDickeyResult {
  BoundaryEstimate b_ub; // QJ-U over QJ-B
  BoundaryEstimate b_db; // QJ-D over QJ-B
  BoundaryEstimate b_ud;
  double delta = 0.02;
};

SavageDickeyResult savage_dickey_bf(const std::vector<double>& phi_samples,
                                    const ScalarPrior& phi_prior, double delta = 0.02);

struct RocPoint {
  double eps = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points; // eps descending
  double auc = 0.0;
};

RocCurve roc_reconstruction(const PartialOrder& truth, const EdgeMarginals& marg,
                            const std::vector<double>& eps_grid);

// Effective sample size via the initial-positive-sequence autocorrelation sum.
double effective_sample_size(const std::vector<double>& xs);

} // namespace vsp

#endif
