#ifndef VSP_OBSERVATION_HPP
#define VSP_OBSERVATION_HPP

#include <string>
#include <vector>

#include "vsp/rng.hpp"
#include "vsp/tree.hpp"

namespace vsp {

enum class Model { QJU, QJD, QJB };

std::string model_name(Model m);
Model model_from_name(const std::string& s);

// One observed list, top to bottom. The membership is the list contents.
struct RankList {
  std::vector<Actor> ordering;
};

struct ActorInfo {
  Actor id = 0;
  std::string name;
  std::string group;
};

struct RankDataset {
  std::vector<ActorInfo> actors;
  std::vector<RankList> lists;

  std::vector<Actor> actor_ids() const; // sorted
  bool has_actor(Actor a) const;
};

// log Q_up(x | v(m), p): the list is built from the top; each step picks a
// uniform remaining actor with probability p and otherwise the top of a
// uniform linear extension of the remaining suborder.
double qju_log_lik(const std::vector<Actor>& x, const Mdt& m, double p);
// Mirror model built from the bottom using bottom-placement counts.
double qjd_log_lik(const std::vector<Actor>& x, const Mdt& m, double p);
// Bi-directional model: each placement fills the next slot from the top with
// probability phi, else from the bottom. Evaluated by memoizing the interval
// recursion P(a,b) = phi*top(a,b)*P(a+1,b) + (1-phi)*bottom(a,b)*P(a,b-1).
double qjb_log_lik(const std::vector<Actor>& x, const Mdt& m, double p, double phi);

struct DatasetLogLik {
  double total = 0.0;
  std::vector<double> per_list;
};

// Independent lists, each evaluated on the restriction of the tree to the
// list's membership.
DatasetLogLik dataset_log_lik(const RankDataset& y, const Mdt& m, Model model, double p,
                              double phi);

std::vector<Actor> simulate_qju(const Mdt& m, double p, Rng& rng);
std::vector<Actor> simulate_qjb(const Mdt& m, double p, double phi, Rng& rng);

RankDataset simulate_dataset(const Mdt& m, Model model, double p, double phi,
                             const std::vector<ActorSubset>& memberships, Rng& rng);

} // namespace vsp

#endif
