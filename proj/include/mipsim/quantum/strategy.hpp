#pragma once

// Entangled strategies for the multilinearity game and the consistency
// calculus of sub-measurement families.

#include <iosfwd>
#include <vector>

#include "mipsim/mlgame.hpp"
#include "mipsim/quantum/linalg.hpp"

namespace mipsim::quantum {

/// Largest total dimension d^r of a shared state.
inline constexpr std::size_t kMaxStateDim = 4096;

/// Operators A_x^a, indexed [point_index(x)][a].
using PovmFamily = std::vector<std::vector<Matrix>>;

struct QuantumStrategy {
  const Field* field = nullptr;
  std::size_t n = 0;
  unsigned r = 3;
  std::size_t d = 1;
  Vector psi;  // in (C^d)^{(x) r}, register 0 most significant
  std::vector<PovmFamily> families;  // one shared family or one per player
  bool projective = false;
  bool permutation_invariant = false;

  const PovmFamily& family(unsigned player) const { return families.size() == 1 ? families[0] : families.at(player); }
  std::uint64_t points() const { return std::uint64_t{1} << (field->k() * n); }
};

/// Checks the state norm, every POVM (PSD, sums to I) and, when set, the
/// projective and permutation-invariance flags. Throws DomainError.
void validate(const QuantumStrategy& s, double tol = kStructuralTol);

/// Applies `op` to register `reg` of a state in (C^d)^{(x) r}.
Vector apply_local(const Vector& psi, std::size_t d, unsigned r, unsigned reg, const Matrix& op);
/// <psi| (x)_reg ops[reg] |psi>, where a null entry stands for the identity.
Complex expectation(const Vector& psi, std::size_t d, unsigned r, const std::vector<const Matrix*>& ops);
/// Reduced density matrix on registers 0 .. count-1.
Matrix reduced_density(const Vector& psi, std::size_t d, unsigned r, unsigned count);
/// Swaps registers i and j.
Vector swap_registers(const Vector& psi, std::size_t d, unsigned r, unsigned i, unsigned j);
bool is_permutation_invariant(const Vector& psi, std::size_t d, unsigned r, double tol = kStructuralTol);
/// Projection onto the symmetric subspace, normalized.
Vector symmetrize_state(const Vector& psi, std::size_t d, unsigned r);

/// Exact game value: half the consistency term (all r players measure the
/// same x and agree) plus half the linearity term (three players, as chosen
/// by the referee, measure x, y, z on an axis line and answer collinearly).
double game_value_quantum(const MLGameConfig& config, const QuantumStrategy& s);

/// |Psi> = sum_s sqrt(w_s) |s>^{(x) r}; player j measures diagonally with
/// A_x^a = sum_s [f^s_j(x) = a] |s><s|.
QuantumStrategy classical_embedding(const MLGameConfig& config, const ClassicalStrategy& s);

/// Turns per-player strategies into one permutation-invariant strategy with
/// local dimension r d: |Psi'> = (r!)^{-1/2} sum_sigma |sigma(1) .. sigma(r)>
/// (x) P_sigma |Psi>, and A'_x^a = sum_j |j><j| (x) A^{(j) a}_x.
QuantumStrategy symmetrize(const QuantumStrategy& s);

/// Conjugates every A_x^a by exp(i theta H_x) for fixed random Hermitian H_x.
QuantumStrategy rotate_measurements(const QuantumStrategy& s, double theta, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Sub-measurement families

/// Arity k: for each x_{>k} in F^{n-k} (indexed by point_index of the tail)
/// operators P^g for g in ML(F^k, F) (indexed by ml_index). Coordinates
/// 1..k are the arguments of g.
struct SubMeasurementFamily {
  const Field* field = nullptr;
  std::size_t n = 0;
  std::size_t arity = 0;
  std::size_t d = 1;
  std::vector<std::vector<Matrix>> ops;  // [tail][g]

  std::uint64_t tails() const;
  std::uint64_t outcomes() const;
  Matrix total(std::uint64_t tail) const;
  /// max over tails of the largest eigenvalue of sum_g P^g.
  double max_total_eigenvalue() const;
};

/// Checks each P^g PSD and sum_g P^g <= I. Throws DomainError.
void validate(const SubMeasurementFamily& f, double tol = kStructuralTol);

/// The arity-0 family of a player's measurement.
SubMeasurementFamily as_family(const QuantumStrategy& s, unsigned player = 0);

/// Index of g restricted by fixing its coordinates from `from` onward to the
/// given values (so the result has arity `from`).
std::uint64_t restrict_index(const Field& field, std::size_t arity, std::uint64_t g, std::size_t from,
                             std::span<const Elem> values);

/// cons(P, Q) on a two-register state rho2 with P on the first register:
/// E_{x>k} sum_g Tr(rho2 (P^{g|x_{k+1..l}} (x) Q^g)) for arities k <= l;
/// for k > l this is cons(Q, P).
double cons(const SubMeasurementFamily& p, const SubMeasurementFamily& q, const Matrix& rho2);
/// Same with P^{g|} replaced by sum_h P^h - P^{g|}.
double inc(const SubMeasurementFamily& p, const SubMeasurementFamily& q, const Matrix& rho2);
/// E_{x>l} sum_g Tr(rho2 (I (x) Q^g)).
double trace_rho_total(const SubMeasurementFamily& q, const Matrix& rho2);

// ---------------------------------------------------------------------------
// Strategy files

/// Text layout:
///   quantum-strategy
///   field <k> <modulus hex>
///   n <n> r <r> d <d> families <1|r> projective <0|1> symmetric <0|1>
///   state
///   <d^r entries>
///   povm <family> <x index> <a>
///   <d rows of d entries>
///   ...
/// Entries are `re,im` pairs separated by whitespace, matrices row-major.
void write_strategy(std::ostream& out, const QuantumStrategy& s);
QuantumStrategy read_strategy(std::istream& in);

}  // namespace mipsim::quantum
