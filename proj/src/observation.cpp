#include "vsp/observation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "vsp/counting.hpp"
#include "vsp/error.hpp"

namespace vsp {

namespace {

const double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp2(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void check_permutation(const std::vector<Actor>& x, const Mdt& m) {
  std::vector<Actor> xs = x;
  std::sort(xs.begin(), xs.end());
  if (xs != m.actors()) throw ActorMismatch("list is not a permutation of the tree's actors");
}

} // namespace

std::string model_name(Model m) {
  switch (m) {
    case Model::QJU: return "qj-u";
    case Model::QJD: return "qj-d";
    case Model::QJB: return "qj-b";
  }
  return "?";
}

Model model_from_name(const std::string& s) {
  if (s == "qj-u" || s == "qju") return Model::QJU;
  if (s == "qj-d" || s == "qjd") return Model::QJD;
  if (s == "qj-b" || s == "qjb") return Model::QJB;
  throw Error("unknown model '" + s + "'");
}

std::vector<Actor> RankDataset::actor_ids() const {
  std::vector<Actor> out;
  for (const auto& a : actors) out.push_back(a.id);
  std::sort(out.begin(), out.end());
  return out;
}

bool RankDataset::has_actor(Actor a) const {
  for (const auto& info : actors)
    if (info.id == a) return true;
  return false;
}

double qju_log_lik(const std::vector<Actor>& x, const Mdt& m, double p) {
  check_permutation(x, m);
  int n = static_cast<int>(x.size());
  if (n == 1) return 0.0;
  Mdt w = m;
  double acc = 0.0;
  double log_cur = count_le(w).log_value;
  for (int i = 0; i < n - 1; ++i) {
    bool free_top = w.pred_free(x[i]);
    w.delete_leaf(x[i]);
    double log_next = count_le(w).log_value;
    double ratio = free_top ? std::exp(log_next - log_cur) : 0.0;
    double factor = p / (n - i) + (1.0 - p) * ratio;
    acc += factor > 0.0 ? std::log(factor) : kNegInf;
    log_cur = log_next;
  }
  return acc;
}

double qjd_log_lik(const std::vector<Actor>& x, const Mdt& m, double p) {
  check_permutation(x, m);
  int n = static_cast<int>(x.size());
  if (n == 1) return 0.0;
  Mdt w = m;
  double acc = 0.0;
  double log_cur = count_le(w).log_value;
  for (int i = 0; i < n - 1; ++i) {
    Actor a = x[n - 1 - i];
    bool free_bottom = w.succ_free(a);
    w.delete_leaf(a);
    double log_next = count_le(w).log_value;
    double ratio = free_bottom ? std::exp(log_next - log_cur) : 0.0;
    double factor = p / (n - i) + (1.0 - p) * ratio;
    acc += factor > 0.0 ? std::log(factor) : kNegInf;
    log_cur = log_next;
  }
  return acc;
}

namespace {

// Per-interval data for the QJ-B recursion: log LE count of v[x_{a:b}] and
// whether the interval's ends are placeable there.
struct IntervalEval {
  const std::vector<Actor>& x;
  const Mdt& base;
  int n;
  struct Cell {
    double log_count;
    bool top_free;
    bool bottom_free;
    bool ready = false;
  };
  std::vector<Cell> cells;

  IntervalEval(const std::vector<Actor>& x_, const Mdt& base_)
      : x(x_), base(base_), n(static_cast<int>(x_.size())), cells(static_cast<size_t>(n) * n) {}

  const Cell& at(int a, int b) {
    Cell& c = cells[static_cast<size_t>(a) * n + b];
    if (!c.ready) {
      Mdt w = base;
      for (int i = 0; i < a; ++i) w.delete_leaf(x[i]);
      for (int i = n - 1; i > b; --i) w.delete_leaf(x[i]);
      c.log_count = count_le(w).log_value;
      c.top_free = w.pred_free(x[a]);
      c.bottom_free = w.succ_free(x[b]);
      c.ready = true;
    }
    return c;
  }
};

} // namespace

double qjb_log_lik(const std::vector<Actor>& x, const Mdt& m, double p, double phi) {
  check_permutation(x, m);
  int n = static_cast<int>(x.size());
  if (n == 1) return 0.0;
  IntervalEval ev(x, m);
  std::vector<double> memo(static_cast<size_t>(n) * n, 1.0); // 1.0 marks unset
  std::function<double(int, int)> rec = [&](int a, int b) -> double {
    if (a == b) return 0.0;
    double& slot = memo[static_cast<size_t>(a) * n + b];
    if (slot <= 0.0) return slot;
    const auto& cell = ev.at(a, b);
    int len = b - a + 1;
    double out;
    if (phi >= 1.0) {
      double ratio = cell.top_free ? std::exp(ev.at(a + 1, b).log_count - cell.log_count) : 0.0;
      double f = p / len + (1.0 - p) * ratio;
      out = (f > 0.0 ? std::log(f) : kNegInf) + rec(a + 1, b);
    } else if (phi <= 0.0) {
      double ratio = cell.bottom_free ? std::exp(ev.at(a, b - 1).log_count - cell.log_count) : 0.0;
      double f = p / len + (1.0 - p) * ratio;
      out = (f > 0.0 ? std::log(f) : kNegInf) + rec(a, b - 1);
    } else {
      double rt = cell.top_free ? std::exp(ev.at(a + 1, b).log_count - cell.log_count) : 0.0;
      double ft = p / len + (1.0 - p) * rt;
      double top = (ft > 0.0 ? std::log(phi) + std::log(ft) : kNegInf) + rec(a + 1, b);
      double rb = cell.bottom_free ? std::exp(ev.at(a, b - 1).log_count - cell.log_count) : 0.0;
      double fb = p / len + (1.0 - p) * rb;
      double bottom = (fb > 0.0 ? std::log1p(-phi) + std::log(fb) : kNegInf) + rec(a, b - 1);
      out = logsumexp2(top, bottom);
    }
    slot = out;
    return out;
  };
  return rec(0, n - 1);
}

DatasetLogLik dataset_log_lik(const RankDataset& y, const Mdt& m, Model model, double p,
                              double phi) {
  DatasetLogLik out;
  std::vector<Actor> ground = m.actors();
  for (const RankList& list : y.lists) {
    Mdt w = m;
    std::vector<Actor> members = list.ordering;
    std::sort(members.begin(), members.end());
    for (Actor a : ground)
      if (!std::binary_search(members.begin(), members.end(), a)) w.delete_leaf(a);
    double ll = 0.0;
    switch (model) {
      case Model::QJU: ll = qju_log_lik(list.ordering, w, p); break;
      case Model::QJD: ll = qjd_log_lik(list.ordering, w, p); break;
      case Model::QJB: ll = qjb_log_lik(list.ordering, w, p, phi); break;
    }
    out.per_list.push_back(ll);
    out.total += ll;
  }
  return out;
}

namespace {

Actor pick_weighted(const std::map<Actor, LeCount>& counts, double log_total, Rng& rng) {
  std::vector<Actor> ids;
  std::vector<double> w;
  for (const auto& [a, c] : counts) {
    ids.push_back(a);
    w.push_back(c.value == 0 ? 0.0 : std::exp(c.log_value - log_total));
  }
  return ids[rng.categorical(w)];
}

} // namespace

std::vector<Actor> simulate_qju(const Mdt& m, double p, Rng& rng) {
  Mdt w = m;
  std::vector<Actor> out;
  int n = m.n_leaves();
  for (int k = 0; k < n; ++k) {
    std::vector<Actor> remaining = w.actors();
    Actor a;
    if (remaining.size() == 1) {
      a = remaining[0];
    } else if (rng.bernoulli(p)) {
      a = remaining[rng.uniform_int(remaining.size())];
    } else {
      a = pick_weighted(top_counts(w), count_le(w).log_value, rng);
    }
    out.push_back(a);
    if (static_cast<int>(remaining.size()) > 1) w.delete_leaf(a);
  }
  return out;
}

std::vector<Actor> simulate_qjb(const Mdt& m, double p, double phi, Rng& rng) {
  int n = m.n_leaves();
  Mdt w = m;
  std::vector<Actor> x(static_cast<size_t>(n), -1);
  int filled_top = 0, filled_bottom = 0;
  for (int k = 0; k < n; ++k) {
    std::vector<Actor> remaining = w.actors();
    bool top;
    int pos;
    if (k == n - 1) {
      // Final position is forced; no placement draw.
      top = true;
      pos = filled_top;
    } else if (rng.bernoulli(phi)) {
      top = true;
      pos = filled_top++;
    } else {
      top = false;
      pos = n - 1 - filled_bottom++;
    }
    Actor a;
    if (remaining.size() == 1) {
      a = remaining[0];
    } else if (rng.bernoulli(p)) {
      a = remaining[rng.uniform_int(remaining.size())];
    } else {
      auto counts = top ? top_counts(w) : bottom_counts(w);
      a = pick_weighted(counts, count_le(w).log_value, rng);
    }
    x[pos] = a;
    if (static_cast<int>(remaining.size()) > 1) w.delete_leaf(a);
  }
  return x;
}

RankDataset simulate_dataset(const Mdt& m, Model model, double p, double phi,
                             const std::vector<ActorSubset>& memberships, Rng& rng) {
  RankDataset ds;
  for (Actor a : m.actors()) ds.actors.push_back({a, "actor" + std::to_string(a), ""});
  std::vector<Actor> ground = m.actors();
  for (const ActorSubset& o : memberships) {
    Mdt w = m;
    std::vector<Actor> members = o;
    std::sort(members.begin(), members.end());
    for (Actor a : ground)
      if (!std::binary_search(members.begin(), members.end(), a)) w.delete_leaf(a);
    RankList list;
    switch (model) {
      case Model::QJU: list.ordering = simulate_qju(w, p, rng); break;
      case Model::QJD: list.ordering = simulate_qjb(w, p, 0.0, rng); break;
      case Model::QJB: list.ordering = simulate_qjb(w, p, phi, rng); break;
    }
    ds.lists.push_back(std::move(list));
  }
  return ds;
}

} // namespace vsp
