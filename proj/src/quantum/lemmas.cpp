#include "mipsim/quantum/lemmas.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

namespace mipsim::quantum {

namespace {

std::size_t pick_dim(Rng& rng, std::size_t lo, std::size_t hi) { return lo + uniform_below(rng, hi - lo + 1); }

template <class F>
LemmaReport sweep(const std::string& name, std::size_t instances, std::uint64_t seed, std::uint64_t stream, F one) {
  LemmaReport rep;
  rep.lemma = name;
  rep.instances = instances;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::uint64_t s = derive_seed(seed, stream, i);
    Rng rng(s);
    const double v = one(rng);
    if (v > rep.max_violation) {
      rep.max_violation = v;
      rep.worst_seed = s;
    }
  }
  rep.passed = rep.max_violation <= kLemmaSlack;
  return rep;
}

Matrix block_column(const std::vector<Matrix>& blocks) {
  const Eigen::Index d = blocks.front().cols();
  Matrix out(d * static_cast<Eigen::Index>(blocks.size()), d);
  for (std::size_t i = 0; i < blocks.size(); ++i) out.middleRows(d * static_cast<Eigen::Index>(i), d) = blocks[i];
  return out;
}

}  // namespace

LemmaReport check_gentle(std::size_t instances, std::uint64_t seed, std::size_t max_d) {
  return sweep("gentle_measurement", instances, seed, 21, [&](Rng& rng) {
    const std::size_t d = pick_dim(rng, 1, max_d), d2 = pick_dim(rng, 1, max_d);
    const Matrix rho = random_density(d, rng, pick_dim(rng, 1, d));
    const Matrix x = random_contraction(d2, d, rng);
    // Half the instances use near-equal pairs.
    Matrix y = random_contraction(d2, d, rng);
    if (uniform_below(rng, 2) == 0) {
      std::uniform_real_distribution<double> t(0.0, 0.1);
      y = x + t(rng) * (y - x);
      Eigen::JacobiSVD<Matrix> svd(y, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Matrix s = Matrix::Zero(y.rows(), y.cols());
      for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) s(i, i) = std::min(1.0, svd.singularValues()[i]);
      y = svd.matrixU() * s * svd.matrixV().adjoint();
    }
    const double lhs = trace_norm(x * rho * x.adjoint() - y * rho * y.adjoint());
    const Matrix diff = x - y;
    const double rhs = 2 * std::sqrt(std::max(0.0, (diff * rho * diff.adjoint()).trace().real()));
    return lhs - rhs;
  });
}

LemmaReport check_gentle_sum(std::size_t instances, std::uint64_t seed, std::size_t max_d) {
  return sweep("gentle_sum", instances, seed, 22, [&](Rng& rng) {
    const std::size_t d = pick_dim(rng, 1, max_d), m = pick_dim(rng, 1, 5);
    const Matrix rho = random_density(d, rng);
    const auto a = random_submeasurement(d, m, rng);
    const auto b = random_submeasurement(d, m, rng);
    std::vector<Matrix> sa, sb;
    Matrix lhs_m = Matrix::Zero(d, d);
    double rhs_sq = 0;
    for (std::size_t i = 0; i < m; ++i) {
      sa.push_back(psd_sqrt(a[i]));
      sb.push_back(psd_sqrt(b[i]));
      lhs_m += sa[i] * rho * sa[i] - sb[i] * rho * sb[i];
      const Matrix diff = sa[i] - sb[i];
      rhs_sq += (diff * diff * rho).trace().real();
    }
    // The block-column reduction to the two-operator lemma.
    const Matrix x = block_column(sa), y = block_column(sb);
    const double reduced = trace_norm(x * rho * x.adjoint() - y * rho * y.adjoint());
    const double rhs = 2 * std::sqrt(std::max(0.0, rhs_sq));
    return std::max(trace_norm(lhs_m) - reduced, reduced - rhs);
  });
}

LemmaReport check_gentle_povm(std::size_t instances, std::uint64_t seed) {
  return sweep("gentle_povm", instances, seed, 23, [&](Rng& rng) {
    const std::size_t d1 = pick_dim(rng, 2, 3), d3 = pick_dim(rng, 1, 2), m = pick_dim(rng, 2, 4);
    const std::size_t dim = d1 * d1 * d3;
    // Random sigma, symmetrized by conjugation with the swap of registers 1 and 2.
    Matrix swap = Matrix::Zero(dim, dim);
    for (std::size_t i = 0; i < d1; ++i)
      for (std::size_t j = 0; j < d1; ++j)
        for (std::size_t k = 0; k < d3; ++k) swap((i * d1 + j) * d3 + k, (j * d1 + i) * d3 + k) = 1;
    Matrix sigma = random_density(dim, rng, pick_dim(rng, 1, dim));
    sigma = (sigma + swap * sigma * swap) / 2.0;
    std::uniform_real_distribution<double> scale(0.2, 1.0);
    sigma *= scale(rng);
    // A near-sharp POVM: mix a projective one with a random one.
    const auto proj = random_projective(d1, m, rng);
    const auto rnd = random_povm(d1, m, rng);
    std::uniform_real_distribution<double> mix(0.0, 1.0);
    const double t = std::pow(mix(rng), 3);
    std::vector<Matrix> a;
    for (std::size_t i = 0; i < m; ++i) a.push_back((1 - t) * proj[i] + t * rnd[i]);
    const Matrix id1 = Matrix::Identity(d1, d1), id3 = Matrix::Identity(d3, d3);
    double delta = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j)
        if (i != j) delta += (kron(kron(a[i], a[j]), id3) * sigma).trace().real();
    const Matrix reduced = partial_trace(sigma, {d1, d1, d3}, {0, 2});
    Matrix lhs_m = -reduced;
    for (std::size_t i = 0; i < m; ++i) {
      const Matrix op = kron(psd_sqrt(a[i]), id3);
      lhs_m += op * reduced * op;
    }
    delta = std::max(0.0, delta);
    return trace_norm(lhs_m) - (2 * std::sqrt(delta) + delta);
  });
}

LemmaReport check_expansion(std::size_t instances, std::uint64_t seed, std::size_t max_d) {
  return sweep("expansion", instances, seed, 24, [&](Rng& rng) {
    const std::size_t p = 4, n = pick_dim(rng, 1, 3), d = pick_dim(rng, 1, max_d);
    std::size_t count = 1;
    for (std::size_t i = 0; i < n; ++i) count *= p;
    const Matrix rho = random_density(d, rng);
    const Matrix c = random_contraction(d, d, rng);
    const Matrix base = c * c.adjoint();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double spread = std::pow(u(rng), 2);
    std::vector<Matrix> a(count);
    for (auto& ax : a) {
      ax = spectral_map(base + spread * random_hermitian(d, rng),
                        [](double v) { return std::clamp(v, 0.0, 1.0); });
    }
    Matrix mean = Matrix::Zero(d, d);
    for (const auto& ax : a) mean += ax;
    mean /= static_cast<double>(count);
    double lhs = 0;
    for (const auto& ax : a) {
      const double nr = rho_norm(ax - mean, rho);
      lhs += nr * nr;
    }
    lhs /= static_cast<double>(count);
    double eps = 0;
    std::size_t stride = 1;
    for (std::size_t i = 0; i < n; ++i, stride *= p) {
      for (std::size_t x = 0; x < count; ++x) {
        const std::size_t xi = (x / stride) % p;
        for (std::size_t v = 0; v < p; ++v) {
          const std::size_t x2 = x + (v - xi) * stride;
          const double nr = rho_norm(a[x] - a[x2], rho);
          eps += nr * nr;
        }
      }
    }
    eps /= static_cast<double>(n * count * p);
    return lhs - 2.0 * static_cast<double>(n) * eps;
  });
}

LemmaReport check_matrix_cauchy_schwarz(std::size_t instances, std::uint64_t seed, std::size_t max_d) {
  return sweep("matrix_cauchy_schwarz", instances, seed, 25, [&](Rng& rng) {
    const std::size_t m = pick_dim(rng, 1, max_d), k = pick_dim(rng, 1, max_d), l = pick_dim(rng, 1, max_d);
    const Matrix a = random_ginibre(m, k, rng);
    Matrix b = random_ginibre(m, l, rng);
    // Aligned pairs approach equality.
    if (uniform_below(rng, 2) == 0 && k == l) b = a * Complex(0.5, 0.3) + 0.01 * b;
    return trace_norm(a.adjoint() * b) - frobenius_norm(a) * frobenius_norm(b);
  });
}

std::vector<LemmaReport> lemma_checks(std::size_t instances, std::uint64_t seed) {
  return {check_gentle(instances, seed), check_gentle_sum(instances, seed), check_gentle_povm(instances, seed),
          check_expansion(instances, seed), check_matrix_cauchy_schwarz(instances, seed)};
}

void write_lemma_csv(std::ostream& out, const std::vector<LemmaReport>& reports) {
  out << "lemma,instances,max_violation,worst_seed,passed\n";
  for (const auto& r : reports) {
    out << r.lemma << ',' << r.instances << ',' << std::setprecision(6) << std::scientific << r.max_violation
        << std::defaultfloat << ',' << r.worst_seed << ',' << (r.passed ? "true" : "false") << '\n';
  }
}

// ---------------------------------------------------------------------------
// Toy instances

SubMeasurementFamily random_family(std::size_t n, std::size_t arity, std::size_t d, Rng& rng) {
  const Field& F = Field::tower(0);
  SubMeasurementFamily f{&F, n, arity, d, {}};
  for (std::uint64_t t = 0; t < f.tails(); ++t) f.ops.push_back(random_submeasurement(d, f.outcomes(), rng));
  return f;
}

namespace {

MultilinearFn random_ml(const Field& F, std::size_t n, Rng& rng) {
  std::vector<Elem> cube;
  for (std::size_t i = 0; i < (std::size_t{1} << n); ++i) cube.push_back(F.sample(rng));
  return extend(F, cube);
}

void rotate_family(SubMeasurementFamily& f, double theta, Rng& rng) {
  for (auto& row : f.ops) {
    const Matrix u = unitary_exp(random_hermitian(f.d, rng), theta);
    for (auto& op : row) op = hermitian_part(u * op * u.adjoint());
  }
}

}  // namespace

ToyInstance random_toy_instance(std::uint64_t seed, std::size_t max_d) {
  Rng rng(seed);
  const Field& F = Field::tower(0);
  const std::size_t n = pick_dim(rng, 1, 2), k = pick_dim(rng, 1, n), d = pick_dim(rng, 2, max_d);
  std::vector<MultilinearFn> labels;
  for (std::size_t s = 0; s < d; ++s) labels.push_back(random_ml(F, n, rng));
  std::uniform_real_distribution<double> u(0.0, 1.0);

  ToyInstance inst;
  inst.A = classical_family(F, n, 0, labels);
  rotate_family(inst.A, 0.3 * u(rng), rng);

  // Symmetric state close to sum_s sqrt(w_s) |s s>.
  Vector psi = Vector::Zero(static_cast<Eigen::Index>(d * d));
  for (std::size_t s = 0; s < d; ++s) psi[static_cast<Eigen::Index>(s * d + s)] = std::sqrt(0.1 + u(rng));
  psi /= psi.norm();
  psi += 0.3 * u(rng) * random_state(d * d, rng);
  psi = symmetrize_state(psi, d, 2);

  QuantumStrategy& st = inst.strategy;
  st.field = &F;
  st.n = n;
  st.r = 2;
  st.d = d;
  st.psi = psi;
  st.families = {inst.A.ops};
  st.projective = true;
  st.permutation_invariant = true;

  if (uniform_below(rng, 2) == 0) {
    inst.R = random_family(n, k, d, rng);
  } else {
    inst.R = classical_family(F, n, k, labels);
    rotate_family(inst.R, 0.3 * u(rng), rng);
    const double c = 0.5 + 0.5 * u(rng);
    for (auto& row : inst.R.ops)
      for (auto& op : row) op *= c;
  }
  inst.rho2 = reduced_density(psi, d, 2, 2);
  inst.rho1 = reduced_density(psi, d, 2, 1);
  return inst;
}

}  // namespace mipsim::quantum
