#include "mipsim/quantum/constructions.hpp"

#include <algorithm>
#include <cmath>

namespace mipsim::quantum {

namespace {

std::uint64_t fn_index(const MultilinearFn& f) { return f.arity() == 0 ? f.table()[0].bits() : ml_index(f); }

void require_projective(const SubMeasurementFamily& f, const char* what) {
  for (std::uint64_t t = 0; t < f.tails(); ++t)
    for (std::uint64_t a = 0; a < f.outcomes(); ++a) {
      const Matrix& m = f.ops[t][a];
      const double err = (m * m - m).cwiseAbs().maxCoeff();
      if (err > kStructuralTol) {
        throw DomainError(std::string(what) + " needs projective measurements; question " + std::to_string(t) +
                          " outcome " + std::to_string(a) + " has |A^2 - A| = " + std::to_string(err));
      }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Lines measurement

SubMeasurementFamily LinesResult::to_family(const QuantumStrategy& s) const {
  if (axis != 0) throw DomainError("only lines along the first coordinate form an arity-1 family");
  return SubMeasurementFamily{s.field, s.n, 1, s.d, B};
}

LinesResult lines_measurement(const QuantumStrategy& s, std::size_t axis, unsigned player) {
  validate(s);
  const SubMeasurementFamily A = as_family(s, player);
  require_projective(A, "the lines measurement");
  if (axis >= s.n) throw DomainError("axis out of range");
  const Field& F = *s.field;
  const std::uint64_t p = F.size(), K = F.k();
  const std::uint64_t rests = std::uint64_t{1} << (K * (s.n - 1));
  const std::uint64_t lines = p * p;
  const unsigned shift = static_cast<unsigned>(K * axis);
  const std::uint64_t low_mask = (std::uint64_t{1} << shift) - 1;
  auto full_index = [&](std::uint64_t rest, std::uint64_t u) {
    return (rest & low_mask) | (u << shift) | ((rest >> shift) << (shift + K));
  };
  // Value of line l = (l0, l1) at u: l0 + u (l1 - l0).
  auto line_at = [&](std::uint64_t l, std::uint64_t u) {
    const std::uint64_t l0 = l & F.mask(), l1 = l >> K;
    return l0 ^ F.mul_bits(u, l0 ^ l1);
  };

  LinesResult out;
  out.axis = axis;
  out.B.assign(rests, std::vector<Matrix>(lines, Matrix::Zero(s.d, s.d)));
  const double w = 1.0 / static_cast<double>(p * (p - 1));
  const Matrix id = Matrix::Identity(s.d, s.d);
  for (std::uint64_t rest = 0; rest < rests; ++rest) {
    Matrix total = Matrix::Zero(s.d, s.d);
    for (std::uint64_t l = 0; l < lines; ++l) {
      Matrix& b = out.B[rest][l];
      for (std::uint64_t u = 0; u < p; ++u)
        for (std::uint64_t v = 0; v < p; ++v) {
          if (u == v) continue;
          const Matrix& au = A.ops[full_index(rest, u)][line_at(l, u)];
          const Matrix& av = A.ops[full_index(rest, v)][line_at(l, v)];
          b += au * av * au;
        }
      b *= w;
      total += b;
    }
    out.completeness_error = std::max(out.completeness_error, (total - id).cwiseAbs().maxCoeff());
  }

  const Matrix rho = reduced_density(s.psi, s.d, s.r, 1);
  double defect = 0;
  for (std::uint64_t rest = 0; rest < rests; ++rest)
    for (std::uint64_t u = 0; u < p; ++u) {
      std::vector<Matrix> grouped(p, Matrix::Zero(s.d, s.d));
      for (std::uint64_t l = 0; l < lines; ++l) grouped[line_at(l, u)] += out.B[rest][l];
      for (std::uint64_t a = 0; a < p; ++a) {
        const double nrm = rho_norm(A.ops[full_index(rest, u)][a] - grouped[a], rho);
        defect += nrm * nrm;
      }
    }
  out.defect = defect / static_cast<double>(rests * p);
  return out;
}

// ---------------------------------------------------------------------------
// Convex program for self-improvement

namespace {

struct Conv1Shape {
  std::uint64_t points, outcomes, p;
  unsigned low_bits;
  std::vector<std::vector<std::uint64_t>> value;  // value[g][x_{<=k} index] = g(x_{<=k})

  std::uint64_t low(std::uint64_t x) const { return x & ((std::uint64_t{1} << low_bits) - 1); }
  std::uint64_t tail(std::uint64_t x) const { return x >> low_bits; }
};

Conv1Shape conv1_shape(const SubMeasurementFamily& a, const SubMeasurementFamily& r, std::size_t max_d) {
  if (a.arity != 0) throw DomainError("conv1 needs the strategy as an arity-0 family");
  if (a.field != r.field || a.n != r.n || a.d != r.d) throw DomainError("families differ in field, n or d");
  if (a.d > max_d) throw SizeGuardError("conv1 dimension above " + std::to_string(max_d));
  require_projective(a, "the self-improvement program");
  const Field& F = *a.field;
  Conv1Shape sh{a.tails(), r.outcomes(), F.size(), static_cast<unsigned>(F.k() * r.arity), {}};
  const std::uint64_t lows = std::uint64_t{1} << sh.low_bits;
  sh.value.assign(sh.outcomes, std::vector<std::uint64_t>(lows));
  for (std::uint64_t g = 0; g < sh.outcomes; ++g)
    for (std::uint64_t lo = 0; lo < lows; ++lo) {
      sh.value[g][lo] = restrict_index(F, r.arity, g, 0, point_from_index(F, r.arity, lo));
    }
  return sh;
}

std::vector<std::vector<Matrix>> sqrt_family(const SubMeasurementFamily& r) {
  std::vector<std::vector<Matrix>> out(r.tails());
  for (std::uint64_t t = 0; t < r.tails(); ++t)
    for (const auto& op : r.ops[t]) out[t].push_back(psd_sqrt(op));
  return out;
}

double objective_impl(const Conv1Shape& sh, const std::vector<std::vector<Matrix>>& sq, const Matrix& rho,
                      const SFamily& s) {
  double acc = 0;
  for (std::uint64_t x = 0; x < sh.points; ++x)
    for (std::uint64_t g = 0; g < sh.outcomes; ++g) {
      const double n = rho_norm(s[x][g] - sq[sh.tail(x)][g], rho);
      acc += n * n;
    }
  return acc / static_cast<double>(sh.points);
}

double violation_impl(const Conv1Shape& sh, const SubMeasurementFamily& a, const SFamily& s) {
  double worst = -1e300;
  for (std::uint64_t x = 0; x < sh.points; ++x) {
    std::vector<Matrix> sums(sh.p, Matrix::Zero(a.d, a.d));
    for (std::uint64_t g = 0; g < sh.outcomes; ++g) sums[sh.value[g][sh.low(x)]] += s[x][g] * s[x][g].adjoint();
    for (std::uint64_t v = 0; v < sh.p; ++v) worst = std::max(worst, max_eigenvalue(sums[v] - a.ops[x][v]));
  }
  return worst;
}

void check_s_shape(const Conv1Shape& sh, const SFamily& s, std::size_t d) {
  if (s.size() != sh.points) throw DomainError("S family needs one entry per question");
  for (const auto& row : s) {
    if (row.size() != sh.outcomes) throw DomainError("S family needs one operator per outcome");
    for (const auto& m : row)
      if (static_cast<std::size_t>(m.rows()) != d || static_cast<std::size_t>(m.cols()) != d) {
        throw DomainError("S operator has the wrong dimension");
      }
  }
}

// Exact Euclidean projection onto {S : sum_{g in G(x,a)} S S^dagger <= A_x^a}.
void project(const Conv1Shape& sh, const SubMeasurementFamily& a, SFamily& s) {
  const auto d = static_cast<Eigen::Index>(a.d);
  for (std::uint64_t x = 0; x < sh.points; ++x) {
    std::vector<std::vector<std::uint64_t>> groups(sh.p);
    for (std::uint64_t g = 0; g < sh.outcomes; ++g) groups[sh.value[g][sh.low(x)]].push_back(g);
    for (std::uint64_t v = 0; v < sh.p; ++v) {
      const auto& grp = groups[v];
      if (grp.empty()) continue;
      Matrix m(d, d * static_cast<Eigen::Index>(grp.size()));
      for (std::size_t j = 0; j < grp.size(); ++j) m.middleCols(d * static_cast<Eigen::Index>(j), d) = s[x][grp[j]];
      m = a.ops[x][v] * m;
      Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
      Eigen::VectorXd sv = svd.singularValues();
      for (Eigen::Index i = 0; i < sv.size(); ++i) sv[i] = std::min(sv[i], 1.0);
      m = svd.matrixU() * sv.cast<Complex>().asDiagonal() * svd.matrixV().adjoint();
      for (std::size_t j = 0; j < grp.size(); ++j) s[x][grp[j]] = m.middleCols(d * static_cast<Eigen::Index>(j), d);
    }
  }
}

}  // namespace

SFamily conv1_feasible_point(const SubMeasurementFamily& a, const SubMeasurementFamily& r) {
  const Conv1Shape sh = conv1_shape(a, r, 8);
  const auto sq = sqrt_family(r);
  SFamily s(sh.points);
  for (std::uint64_t x = 0; x < sh.points; ++x)
    for (std::uint64_t g = 0; g < sh.outcomes; ++g) {
      s[x].push_back(a.ops[x][sh.value[g][sh.low(x)]] * sq[sh.tail(x)][g]);
    }
  return s;
}

double conv1_objective(const SubMeasurementFamily& a, const SubMeasurementFamily& r, const Matrix& rho,
                       const SFamily& s) {
  const Conv1Shape sh = conv1_shape(a, r, 8);
  check_s_shape(sh, s, a.d);
  return objective_impl(sh, sqrt_family(r), rho, s);
}

double conv1_violation(const SubMeasurementFamily& a, const SubMeasurementFamily& r, const SFamily& s) {
  const Conv1Shape sh = conv1_shape(a, r, 8);
  check_s_shape(sh, s, a.d);
  return violation_impl(sh, a, s);
}

Conv1Report self_improvement_feasible(const SubMeasurementFamily& a, const SubMeasurementFamily& r,
                                      const Matrix& rho) {
  validate(r);
  const SFamily s = conv1_feasible_point(a, r);
  Conv1Report rep;
  rep.max_violation = conv1_violation(a, r, s);
  rep.feasible = rep.max_violation <= kInequalityTol;
  rep.objective = conv1_objective(a, r, rho, s);
  return rep;
}

Conv1Solution self_improvement_solve(const SubMeasurementFamily& a, const SubMeasurementFamily& r,
                                     const Matrix& rho, std::size_t iterations, SFamily init, double tol) {
  const Conv1Shape sh = conv1_shape(a, r, 6);
  validate(r);
  check_density(rho, 1e-8);
  const auto sq = sqrt_family(r);
  Conv1Solution sol;
  sol.s = init.empty() ? conv1_feasible_point(a, r) : std::move(init);
  check_s_shape(sh, sol.s, a.d);
  project(sh, a, sol.s);
  sol.objective.push_back(objective_impl(sh, sq, rho, sol.s));
  const double lmax = max_eigenvalue(rho);
  for (std::size_t it = 0; it < iterations; ++it) {
    // Step 1/L on w ||sqrt(rho)(S - Q)||^2 with L = 2 w lambda_max(rho).
    SFamily next = sol.s;
    for (std::uint64_t x = 0; x < sh.points; ++x)
      for (std::uint64_t g = 0; g < sh.outcomes; ++g) {
        next[x][g] -= rho * (sol.s[x][g] - sq[sh.tail(x)][g]) / lmax;
      }
    project(sh, a, next);
    const double obj = objective_impl(sh, sq, rho, next);
    if (obj > sol.objective.back() + 1e-13) sol.monotone = false;
    const double prev = sol.objective.back();
    sol.objective.push_back(obj);
    sol.s = std::move(next);
    if (std::abs(prev - obj) <= tol) {
      sol.converged = true;
      break;
    }
  }
  sol.max_violation = violation_impl(sh, a, sol.s);
  return sol;
}

// ---------------------------------------------------------------------------
// Pasting

std::size_t pasting_rounds(double eta) {
  if (!(eta > 0 && eta < 1)) throw ConfigError("pasting needs 0 < eta < 1");
  return static_cast<std::size_t>(std::ceil((10.0 / eta) * std::log(1.0 / eta)));
}

PastingResult pasting(const SubMeasurementFamily& t, double eta) {
  validate(t);
  const Field& F = *t.field;
  if (t.arity >= t.n) throw DomainError("pasting needs arity k < n");
  if (F.size() < 4) throw ConfigError("pasting needs |F| >= 4");
  if (t.d > 8) throw SizeGuardError("pasting dimension above 8");
  PastingResult out;
  out.R = pasting_rounds(eta);
  const std::uint64_t p = F.size(), K = F.k();
  out.scale = 1.0 / (1.0 + static_cast<double>(out.R) / static_cast<double>(p));
  const std::size_t k = t.arity;
  out.V = SubMeasurementFamily{t.field, t.n, k + 1, t.d, {}};
  const std::uint64_t tails = out.V.tails(), outcomes = out.V.outcomes();
  // restricted[g][y] = g with coordinate k+1 fixed to y.
  std::vector<std::vector<std::uint64_t>> restricted(outcomes, std::vector<std::uint64_t>(p));
  for (std::uint64_t g = 0; g < outcomes; ++g)
    for (std::uint64_t y = 0; y < p; ++y) {
      const Elem v = F.elem(y);
      restricted[g][y] = restrict_index(F, k + 1, g, k, std::span<const Elem>(&v, 1));
    }
  const std::size_t R = out.R;
  auto series_sqrt = [R](double lambda) {
    double sum = 0, term = 1;
    for (std::size_t i = 0; i <= R; ++i) {
      sum += term;
      term *= 1 - lambda;
    }
    return std::sqrt(std::max(0.0, sum));
  };
  out.V.ops.resize(tails);
  for (std::uint64_t v = 0; v < tails; ++v) {
    auto tail_of = [&](std::uint64_t y) { return y | (v << K); };
    Matrix total = Matrix::Zero(t.d, t.d);
    for (std::uint64_t y = 0; y < p; ++y) total += t.total(tail_of(y));
    total /= static_cast<double>(p);
    const Matrix tt = spectral_map(total, series_sqrt);
    out.t_tilde.push_back(tt);
    Matrix sum = Matrix::Zero(t.d, t.d);
    for (std::uint64_t g = 0; g < outcomes; ++g) {
      Matrix vg = Matrix::Zero(t.d, t.d);
      for (std::uint64_t y = 0; y < p; ++y) {
        Matrix m = Matrix::Zero(t.d, t.d);
        for (std::uint64_t x = 0; x < p; ++x)
          if (x != y) m += t.ops[tail_of(x)][restricted[g][x]];
        m /= static_cast<double>(p - 1);
        const Matrix kmat = tt * m * tt;
        vg += kmat * t.ops[tail_of(y)][restricted[g][y]] * kmat.adjoint();
      }
      vg = hermitian_part(vg) * (out.scale / static_cast<double>(p));
      sum += vg;
      out.V.ops[v].push_back(std::move(vg));
    }
    out.max_eigenvalue = std::max(out.max_eigenvalue, max_eigenvalue(sum));
  }
  return out;
}

SubMeasurementFamily classical_family(const Field& field, std::size_t n, std::size_t arity,
                                      const std::vector<MultilinearFn>& labels) {
  if (arity > n) throw DomainError("classical_family needs arity <= n");
  SubMeasurementFamily f{&field, n, arity, labels.size(), {}};
  const std::uint64_t tails = f.tails(), outcomes = f.outcomes();
  f.ops.assign(tails, std::vector<Matrix>(outcomes, Matrix::Zero(f.d, f.d)));
  for (std::size_t s = 0; s < labels.size(); ++s) {
    if (&labels[s].field() != &field || labels[s].arity() != n) throw DomainError("label has the wrong shape");
    for (std::uint64_t t = 0; t < tails; ++t) {
      MultilinearFn g = labels[s];
      for (const Elem& v : point_from_index(field, n - arity, t)) g = restrict(g, arity, v);
      const auto i = static_cast<Eigen::Index>(s);
      f.ops[t][fn_index(g)](i, i) = 1;
    }
  }
  return f;
}

}  // namespace mipsim::quantum
