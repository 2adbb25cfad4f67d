#ifndef VSP_COUNTING_HPP
#define VSP_COUNTING_HPP

#include <map>

#include "vsp/bigint.hpp"
#include "vsp/tree.hpp"

namespace vsp {

struct LeCount {
  BigInt value;
  double log_value = 0.0; // ln(value), -inf when value == 0

  static LeCount of(BigInt v) { return {v, log_big(v)}; }
};

// Number of linear extensions of the represented VSP: series nodes multiply
// child counts, parallel nodes multiply child counts and the multinomial
// coefficient of the child sizes.
LeCount count_le(const Mdt& m);
LeCount count_le(const Bdt& t);

// T_i: linear extensions with actor i first. Zero unless i is predecessor
// free, in which case it equals the count of the suborder without i.
std::map<Actor, LeCount> top_counts(const Mdt& m);
// B_i: linear extensions with actor i last.
std::map<Actor, LeCount> bottom_counts(const Mdt& m);

} // namespace vsp

#endif
