#ifndef VSP_BIGINT_HPP
#define VSP_BIGINT_HPP

#include <cmath>
#include <cstdint>
#include <limits>

#include <gmpxx.h>

namespace vsp {

using BigInt = mpz_class;

// Natural log of a positive big integer, -inf for zero.
inline double log_big(const BigInt& x) {
  if (x == 0) return -std::numeric_limits<double>::infinity();
  signed long exp2;
  double d = mpz_get_d_2exp(&exp2, x.get_mpz_t());
  return std::log(d) + static_cast<double>(exp2) * std::log(2.0);
}

inline BigInt binomial(unsigned long n, unsigned long k) {
  BigInt r;
  if (k > n) return 0;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

// Odd double factorial (2k-1)!! = 1*3*5*...*(2k-1), with (-1)!! = 1.
inline BigInt odd_double_factorial(long k) {
  BigInt r = 1;
  for (long i = 1; i <= k; ++i) r *= 2 * i - 1;
  return r;
}

// Number of binary tree topologies on n distinguishable leaves, (2n-3)!!.
inline BigInt tree_topology_count(long n) { return odd_double_factorial(n - 1); }

inline BigInt catalan(unsigned long s) {
  BigInt r = binomial(2 * s, s);
  r /= static_cast<unsigned long>(s + 1);
  return r;
}

} // namespace vsp

#endif
