#pragma once

// Small-bias probability spaces (powering construction) and the AND test,
// which reduces "h vanishes on {0,1}^k" to one summation test.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "mipsim/poly.hpp"
#include "mipsim/sumcheck.hpp"

namespace mipsim {

/// K = 2^k indices; seeds (x, y) range over GF(2^mprime)^2, where GF(2^mprime)
/// uses the smallest irreducible modulus of that degree.
struct BiasedSetSpec {
  unsigned k = 0;
  unsigned mprime = 1;

  BiasedSetSpec(unsigned k, unsigned mprime);

  std::uint64_t K() const { return std::uint64_t{1} << k; }
  const Field& seed_field() const { return *seed_field_; }
  std::uint64_t seed_count() const { return std::uint64_t{1} << (2 * mprime); }
  /// (K - 1) / 2^mprime.
  Rational bias_bound() const;

 private:
  const Field* seed_field_;
};

/// Smallest mprime with (2^k - 1) / 2^mprime <= 1/4.
BiasedSetSpec quarter_bias_spec(unsigned k);

struct Seed {
  Elem x, y;
};

/// bit i = <x^i, y> over GF(2), for i = 0 .. K-1.
bool zeta(const BiasedSetSpec& spec, const Seed& seed, std::uint64_t i);
/// All K bits, bit i of the result = zeta_i. Requires K <= 64.
std::uint64_t zeta_bits(const BiasedSetSpec& spec, const Seed& seed);
Seed seed_from_index(const BiasedSetSpec& spec, std::uint64_t index);
Seed sample_seed(const BiasedSetSpec& spec, Rng& rng);

/// Signed imbalance #{c.zeta = 0} - #{c.zeta = 1} over all seeds, for every
/// pattern c in GF(2)^K. Requires K <= 16 and 2 mprime <= 16.
std::vector<std::int64_t> bias_spectrum(const BiasedSetSpec& spec);
/// Exact max over nonzero c of |Pr[c.zeta = 0] - Pr[c.zeta = 1]|.
Rational bias_bound_check(const BiasedSetSpec& spec);
/// CSV with header `pattern,bias`, one row per nonzero pattern.
void write_bias_csv(std::ostream& out, const BiasedSetSpec& spec);

/// Exact Pr over seeds that sum_i zeta_i c_i = 0 in F. Rejects c = 0.
Rational zero_mass(const BiasedSetSpec& spec, const std::vector<Elem>& c);

struct AndTestParams {
  const Field* field;
  unsigned k;     // variables of h
  std::size_t d;  // per-variable degree of h
  BiasedSetSpec spec;

  /// Uses the quarter-bias spec for K = 2^k.
  AndTestParams(const Field& field, unsigned k, std::size_t d);
};

/// Multilinear extension Z_j of the zeta bit table over `field`.
MultilinearFn zeta_extension(const Field& field, const BiasedSetSpec& spec, const Seed& seed);

/// The AND-test prover learns the seed and then answers the summation test
/// for H(i) = Z_j(i) h(i).
using AndProver = std::function<RoundHandler(const Seed&)>;

struct AndTranscript {
  Seed seed;
  SumcheckTranscript sumcheck;
  bool accepted() const { return sumcheck.accepted(); }
};

/// Samples a seed, then runs the summation test on H with m = k, degree
/// d + 1 and claimed sum 0. The final read evaluates Z_j(q) locally and
/// h(q) through `h`, once.
AndTranscript run_and_test(const AndTestParams& params, const Oracle& h, const AndProver& prover, Rng& rng);
/// As above with the seed and the point q fixed by the caller.
AndTranscript run_and_test_at(const AndTestParams& params, const Oracle& h, const AndProver& prover,
                              const Seed& seed, std::span<const Elem> q);

/// Honest prover for H = Z_j h. Folds Z_j along the revealed challenges so
/// that each evaluation of H costs one call to h.
AndProver honest_and_prover(const AndTestParams& params, Oracle h);

/// Honest when sum_i zeta_i h(i) = 0 for the drawn seed, otherwise the lazy
/// cheater on the false claim 0.
AndProver best_effort_and_prover(const AndTestParams& params, Oracle h);

}  // namespace mipsim
