#pragma once

// Operator constructions on strategies and sub-measurement families.

#include <vector>

#include "mipsim/quantum/strategy.hpp"

namespace mipsim::quantum {

// ---------------------------------------------------------------------------
// Lines measurement

struct LinesResult {
  std::size_t axis = 0;
  /// B^l indexed [point_index(x with coordinate `axis` removed)][ml_index(l)],
  /// where l is affine in the axis coordinate.
  std::vector<std::vector<Matrix>> B;
  /// max over x_{-i} of max |sum_l B^l - I|.
  double completeness_error = 0;
  /// E_x sum_a ||A_x^a - sum_{l : l(x_i) = a} B^l||_rho^2 with rho the
  /// one-register reduced state.
  double defect = 0;

  /// For axis 0 the lines form an arity-1 family.
  SubMeasurementFamily to_family(const QuantumStrategy& s) const;
};

/// B^l = E_{x_i != x'_i} A_x^{l(x_i)} A_{x'}^{l(x'_i)} A_x^{l(x_i)} for the
/// measurement of `player`. Throws DomainError on a non-projective strategy.
LinesResult lines_measurement(const QuantumStrategy& s, std::size_t axis, unsigned player = 0);

// ---------------------------------------------------------------------------
// Convex program for self-improvement

/// S[x][g] for x in F^n (point_index) and g in ML(F^k, F).
using SFamily = std::vector<std::vector<Matrix>>;

struct Conv1Report {
  bool feasible = false;
  /// max over x, a of the largest eigenvalue of
  /// sum_{g : g(x_{<=k}) = a} S S^dagger - A_x^a.
  double max_violation = 0;
  double objective = 0;
};

/// The feasible point S_x^g = A_x^{g(x_{<=k})} sqrt(R^g_{x>k}).
SFamily conv1_feasible_point(const SubMeasurementFamily& a, const SubMeasurementFamily& r);
/// E_x sum_g ||S_x^g - sqrt(R^g_{x>k})||_rho^2.
double conv1_objective(const SubMeasurementFamily& a, const SubMeasurementFamily& r, const Matrix& rho,
                       const SFamily& s);
double conv1_violation(const SubMeasurementFamily& a, const SubMeasurementFamily& r, const SFamily& s);

/// Builds the feasible point and reports feasibility (at 1e-8) and its
/// objective. `a` must be a projective arity-0 family; d <= 8.
Conv1Report self_improvement_feasible(const SubMeasurementFamily& a, const SubMeasurementFamily& r,
                                      const Matrix& rho);

struct Conv1Solution {
  SFamily s;
  std::vector<double> objective;  // per iterate, starting with the initial point
  bool converged = false;
  bool monotone = true;
  double max_violation = 0;
};

/// Projected gradient descent with step 1/L, L = 2 lambda_max(rho) / |F|^n.
/// The projection is exact: per (x, a) the block row [S^g]_{g(x_{<=k}) = a}
/// is multiplied by the projector A_x^a and its singular values are clipped
/// at 1. Starts from `init` or, if empty, the feasible point. d <= 6.
Conv1Solution self_improvement_solve(const SubMeasurementFamily& a, const SubMeasurementFamily& r,
                                     const Matrix& rho, std::size_t iterations, SFamily init = {},
                                     double tol = 1e-12);

// ---------------------------------------------------------------------------
// Pasting

struct PastingResult {
  SubMeasurementFamily V;  // arity k + 1
  std::size_t R = 0;
  double scale = 1;  // (1 + R/p)^{-1}
  /// T~ per tail x_{>k+1}.
  std::vector<Matrix> t_tilde;
  /// max over tails of the largest eigenvalue of sum_g V^g.
  double max_eigenvalue = 0;
};

/// R = ceil((10 / eta) ln(1 / eta)). Throws ConfigError unless 0 < eta < 1.
std::size_t pasting_rounds(double eta);

/// T~ = (sum_{r=0}^R (I - T)^r)^{1/2} with T = E_{x_{k+1}} sum_h T^h, and
/// V^g = (1 + R/p)^{-1} E_y T~ M_y T~ T_y^{g|y} T~ M_y T~ where
/// M_y = E_{x != y} T_x^{g|x} and T_y^h = T^h_{(y, x_{>k+1})}. d <= 8.
PastingResult pasting(const SubMeasurementFamily& t, double eta);

/// Family whose outcome on each basis state s is g_s restricted to the
/// tail: P^h_{x>k} = sum_s [g_s(., x_{>k}) = h] |s><s|.
SubMeasurementFamily classical_family(const Field& field, std::size_t n, std::size_t arity,
                                      const std::vector<MultilinearFn>& labels);

}  // namespace mipsim::quantum
