#pragma once

// Randomized property checks of the matrix inequalities behind the
// soundness analysis, and random toy instances for the constructions.

#include <iosfwd>
#include <string>
#include <vector>

#include "mipsim/quantum/constructions.hpp"

namespace mipsim::quantum {

struct LemmaReport {
  std::string lemma;
  std::size_t instances = 0;
  /// max over instances of lhs - rhs (negative when every instance holds).
  double max_violation = -1e300;
  std::uint64_t worst_seed = 0;
  bool passed = true;
};

/// Instances violating by more than this fail.
inline constexpr double kLemmaSlack = 1e-9;

/// ||X rho X* - Y rho Y*||_1 <= 2 sqrt(Tr (X-Y) rho (X-Y)*) for random
/// contractions X, Y : C^d -> C^d' and random densities rho.
LemmaReport check_gentle(std::size_t instances, std::uint64_t seed, std::size_t max_d = 8);
/// ||sum_i sqrt(A_i) rho sqrt(A_i) - sqrt(B_i) rho sqrt(B_i)||_1 <=
/// 2 (sum_i Tr((sqrt(A_i) - sqrt(B_i))^2 rho))^{1/2} for random
/// sub-measurements {A_i}, {B_i}.
LemmaReport check_gentle_sum(std::size_t instances, std::uint64_t seed, std::size_t max_d = 8);
/// For sigma >= 0 on three registers, symmetric in the first two, with
/// Tr sigma <= 1, and a POVM {A_i} on one of them:
/// ||sum_i (sqrt(A_i) (x) I) Tr_2(sigma) (sqrt(A_i) (x) I) - Tr_2(sigma)||_1
/// <= 2 sqrt(delta) + delta, delta = sum_{i != j} Tr((A_i (x) A_j (x) I) sigma).
LemmaReport check_gentle_povm(std::size_t instances, std::uint64_t seed);
/// E_x ||A_x - E A||_rho^2 <= 2 n eps for families A : S^n -> [0, I] with
/// |S| = 4, n <= 3, where eps = E_{i, x, x'_i} ||A_x - A_x'||_rho^2.
LemmaReport check_expansion(std::size_t instances, std::uint64_t seed, std::size_t max_d = 4);
/// ||A^dagger B||_1 <= ||A||_F ||B||_F for random rectangular A, B.
LemmaReport check_matrix_cauchy_schwarz(std::size_t instances, std::uint64_t seed, std::size_t max_d = 8);

/// All five checks with the given instance count each.
std::vector<LemmaReport> lemma_checks(std::size_t instances, std::uint64_t seed);
/// CSV with header `lemma,instances,max_violation,worst_seed,passed`.
void write_lemma_csv(std::ostream& out, const std::vector<LemmaReport>& reports);

// ---------------------------------------------------------------------------
// Toy instances

/// A projective arity-0 family A over GF(4)^n on a symmetric two-register
/// state, and an arity-k sub-measurement family R.
struct ToyInstance {
  QuantumStrategy strategy;  // r = 2, shared projective family, symmetric state
  SubMeasurementFamily A;
  SubMeasurementFamily R;
  Matrix rho1, rho2;
};

/// A is a small rotation of a diagonal multilinear strategy, R either a
/// random sub-measurement family or a rotated classical family consistent
/// with A, chosen by the seed. d in [2, max_d], n in {1, 2}, k in [1, n].
ToyInstance random_toy_instance(std::uint64_t seed, std::size_t max_d = 4);

/// Random arity-k sub-measurement family over GF(4)^n with local dimension d.
SubMeasurementFamily random_family(std::size_t n, std::size_t arity, std::size_t d, Rng& rng);

}  // namespace mipsim::quantum
