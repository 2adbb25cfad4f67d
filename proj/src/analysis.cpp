#include "vsp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "vsp/error.hpp"
#include "vsp/tree.hpp"

namespace vsp {

EdgeMarginals edge_marginals(const ChainTrace& trace) {
  if (trace.samples.empty()) throw EmptyTrace("trace contains no samples");
  EdgeMarginals out;
  out.actors = trace.actors;
  if (out.actors.empty()) out.actors = trace.samples.front().tree.actors();
  out.n = static_cast<int>(out.actors.size());
  out.m.assign(static_cast<size_t>(out.n) * out.n, 0.0);
  out.samples = trace.samples.size();
  for (const TraceSample& s : trace.samples) {
    PartialOrder po = mdt_to_vsp(s.tree);
    // Closure positions follow sorted labels, matching out.actors.
    for (int i = 0; i < out.n; ++i)
      for (int j = 0; j < out.n; ++j)
        if (po.rel(i, j)) out.m[static_cast<size_t>(i) * out.n + j] += 1.0;
  }
  for (double& x : out.m) x /= static_cast<double>(out.samples);
  return out;
}

namespace {

// Strongly connected components (Tarjan) over the retained edge set.
std::vector<std::vector<int>> sccs(int n, const std::vector<Edge>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (const Edge& e : edges) adj[e.from].push_back(e.to);
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<bool> on_stack(n, false);
  std::vector<std::vector<int>> comps;
  int counter = 0;
  std::function<void(int)> strongconnect = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w : adj[v]) {
      if (index[w] < 0) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<int> comp;
      for (;;) {
        int w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
        if (w == v) break;
      }
      comps.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] < 0) strongconnect(v);
  return comps;
}

std::vector<Edge> reduce_edges(int n, const std::vector<Edge>& edges) {
  // Transitive reduction of the closure of an acyclic edge set.
  BitMatrix raw(n);
  for (const Edge& e : edges) raw.set(e.from, e.to, true);
  std::vector<Actor> labels(n);
  std::iota(labels.begin(), labels.end(), 1);
  PartialOrder closed = transitive_closure(raw, labels);
  return transitive_reduction(closed);
}

} // namespace

ConsensusOrder consensus_order(const EdgeMarginals& marg, double eps_weak, double eps_strong) {
  ConsensusOrder out;
  out.actors = marg.actors;
  out.eps_weak = eps_weak;
  out.eps_strong = eps_strong;
  int n = marg.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      double v = marg.at(i, j);
      if (v > eps_weak) out.weak_retained.push_back({i, j});
      if (v > eps_strong) out.strong_retained.push_back({i, j});
    }
  for (const Edge& e : out.weak_retained)
    if (std::find(out.weak_retained.begin(), out.weak_retained.end(), Edge{e.to, e.from}) !=
        out.weak_retained.end())
      throw InconsistentConsensus("2-cycle among retained edges");

  for (const auto& comp : sccs(n, out.weak_retained))
    if (comp.size() > 1) out.cycles.push_back(comp);

  if (out.cycles.empty()) {
    out.weak_display = reduce_edges(n, out.weak_retained);
    out.strong_display = reduce_edges(n, out.strong_retained);
  } else {
    // Cycles are reported rather than silently dropped; the raw retained
    // edges stand in for the display sets.
    out.weak_display = out.weak_retained;
    out.strong_display = out.strong_retained;
  }
  return out;
}

std::map<std::string, GroupRank> average_rank(const ChainTrace& trace,
                                              const std::map<Actor, std::string>& grouping) {
  if (trace.samples.empty()) throw EmptyTrace("trace contains no samples");
  std::vector<Actor> actors = trace.actors;
  for (Actor a : actors)
    if (!grouping.count(a)) throw UnknownGroup("actor " + std::to_string(a) + " has no group");
  std::map<std::string, std::vector<double>> per_sample;
  for (const TraceSample& s : trace.samples) {
    PartialOrder po = mdt_to_vsp(s.tree);
    std::map<std::string, std::pair<double, int>> acc;
    for (int i = 0; i < po.n(); ++i) {
      int above = 0;
      for (int j = 0; j < po.n(); ++j)
        if (po.rel(j, i)) ++above;
      auto& slot = acc[grouping.at(po.labels()[i])];
      slot.first += 1.0 + above;
      slot.second += 1;
    }
    for (auto& [g, sum_count] : acc)
      per_sample[g].push_back(sum_count.first / sum_count.second);
  }
  std::map<std::string, GroupRank> out;
  for (auto& [g, xs] : per_sample) {
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var = xs.size() > 1 ? var / (xs.size() - 1) : 0.0;
    out[g] = {mean, std::sqrt(var / xs.size())};
  }
  return out;
}

std::vector<double> depth_posterior(const ChainTrace& trace) {
  if (trace.samples.empty()) throw EmptyTrace("trace contains no samples");
  int n = static_cast<int>(trace.samples.front().tree.actors().size());
  std::vector<double> hist(n, 0.0);
  for (const TraceSample& s : trace.samples) hist[vsp_depth(s.tree) - 1] += 1.0;
  for (double& h : hist) h /= static_cast<double>(trace.samples.size());
  return hist;
}

WaicResult waic_elpd(const std::vector<std::vector<double>>& pointwise) {
  size_t K = pointwise.size();
  if (K < 2) throw DegenerateTrace("WAIC needs at least 2 samples");
  size_t N = pointwise.front().size();
  for (const auto& row : pointwise) {
    if (row.size() != N) throw Error("ragged pointwise matrix");
    for (double v : row)
      if (!std::isfinite(v)) throw Error("non-finite pointwise log likelihood");
  }
  WaicResult out;
  std::vector<double> elpd_i(N, 0.0);
  for (size_t i = 0; i < N; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < K; ++k) mx = std::max(mx, pointwise[k][i]);
    double sum = 0.0, mean = 0.0;
    for (size_t k = 0; k < K; ++k) {
      sum += std::exp(pointwise[k][i] - mx);
      mean += pointwise[k][i];
    }
    mean /= static_cast<double>(K);
    double lppd = mx + std::log(sum / static_cast<double>(K));
    double var = 0.0;
    for (size_t k = 0; k < K; ++k)
      var += (pointwise[k][i] - mean) * (pointwise[k][i] - mean);
    var /= static_cast<double>(K - 1);
    elpd_i[i] = lppd - var;
    out.p_waic += var;
  }
  double mean_elpd = std::accumulate(elpd_i.begin(), elpd_i.end(), 0.0) / N;
  out.elpd = mean_elpd * static_cast<double>(N);
  double var = 0.0;
  for (double e : elpd_i) var += (e - mean_elpd) * (e - mean_elpd);
  var = N > 1 ? var / (N - 1) : 0.0;
  out.se = std::sqrt(static_cast<double>(N) * var);
  return out;
}

namespace {

BoundaryEstimate boundary_ratio(const std::vector<double>& samples, double prior_mass,
                                double lo, double hi) {
  BoundaryEstimate out;
  size_t count = 0;
  for (double x : samples)
    if (x > lo && x < hi) ++count;
  double k = static_cast<double>(samples.size());
  if (count == 0) {
    out.upper_bound = (1.0 / k) / prior_mass;
  } else {
    out.value = (static_cast<double>(count) / k) / prior_mass;
  }
  return out;
}

} // namespace

SavageDickeyResult savage_dickey_bf(const std::vector<double>& phi_samples,
                                    const ScalarPrior& phi_prior, double delta) {
  if (phi_samples.empty()) throw EmptyTrace("no phi samples");
  SavageDickeyResult out;
  out.delta = delta;
  out.b_ub = boundary_ratio(phi_samples, phi_prior.mass(1.0 - delta, 1.0), 1.0 - delta, 1.0);
  out.b_db = boundary_ratio(phi_samples, phi_prior.mass(0.0, delta), 0.0, delta);
  if (out.b_ub.value && out.b_db.value) {
    out.b_ud.value = *out.b_ub.value / *out.b_db.value;
  } else if (out.b_ub.upper_bound && out.b_db.value) {
    out.b_ud.upper_bound = *out.b_ub.upper_bound / *out.b_db.value;
  }
  return out;
}

RocCurve roc_reconstruction(const PartialOrder& truth, const EdgeMarginals& marg,
                            const std::vector<double>& eps_grid) {
  int n = marg.n;
  std::vector<Actor> sorted = truth.labels();
  std::sort(sorted.begin(), sorted.end());
  if (sorted != marg.actors) throw ActorMismatch("truth and marginals disagree on actors");
  PartialOrder t = restrict_to(truth, sorted); // positions aligned to marg
  long positives = 0, negatives = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      (t.rel(i, j) ? positives : negatives)++;
    }
  RocCurve out;
  std::vector<double> grid = eps_grid;
  std::sort(grid.begin(), grid.end(), std::greater<>());
  for (double eps : grid) {
    long tp = 0, fp = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j || marg.at(i, j) <= eps) continue;
        (t.rel(i, j) ? tp : fp)++;
      }
    RocPoint pt;
    pt.eps = eps;
    pt.tpr = positives > 0 ? static_cast<double>(tp) / positives : 0.0;
    pt.fpr = negatives > 0 ? static_cast<double>(fp) / negatives : 0.0;
    out.points.push_back(pt);
  }
  // Trapezoid AUC over the (fpr, tpr) path extended to (0,0) and (1,1).
  std::vector<std::pair<double, double>> path{{0.0, 0.0}};
  for (auto it = out.points.begin(); it != out.points.end(); ++it)
    path.emplace_back(it->fpr, it->tpr);
  path.emplace_back(1.0, 1.0);
  std::sort(path.begin(), path.end());
  for (size_t i = 1; i < path.size(); ++i)
    out.auc += 0.5 * (path[i].second + path[i - 1].second) * (path[i].first - path[i - 1].first);
  return out;
}

double effective_sample_size(const std::vector<double>& xs) {
  size_t k = xs.size();
  if (k < 4) return static_cast<double>(k);
  double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(k);
  if (var == 0.0) return static_cast<double>(k);
  auto gamma = [&](size_t lag) {
    double acc = 0.0;
    for (size_t i = 0; i + lag < k; ++i) acc += (xs[i] - mean) * (xs[i + lag] - mean);
    return acc / static_cast<double>(k);
  };
  // Geyer initial positive sequence over pairs of lags.
  double sum = 0.0;
  for (size_t lag = 1; lag + 1 < k; lag += 2) {
    double pair = gamma(lag) + gamma(lag + 1);
    if (pair <= 0.0) break;
    sum += pair;
  }
  double ess = static_cast<double>(k) / (1.0 + 2.0 * sum / var);
  return std::min(ess, static_cast<double>(k));
}

} // namespace vsp
