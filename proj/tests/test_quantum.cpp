#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mipsim/quantum/lemmas.hpp"

using namespace mipsim;
using namespace mipsim::quantum;

namespace {

FunctionTable random_ml_table(const Field& F, std::size_t n, Rng& rng) {
  return table_of(ml_from_index(F, n, uniform_below(rng, ml_count(F, n))));
}

ClassicalStrategy random_classical(const MLGameConfig& cfg, Rng& rng, bool multilinear) {
  const std::size_t parts = 1 + uniform_below(rng, 3);
  std::vector<std::pair<double, ClassicalStrategy>> mix;
  for (std::size_t i = 0; i < parts; ++i) {
    DeterministicStrategy d;
    const bool shared = uniform_below(rng, 2) == 0;
    for (unsigned j = 0; j < (shared ? 1u : cfg.r); ++j)
      d.players.push_back(multilinear ? random_ml_table(*cfg.field, cfg.n, rng)
                                      : random_table(*cfg.field, cfg.n, rng));
    mix.emplace_back(1.0 + static_cast<double>(uniform_below(rng, 4)), ClassicalStrategy::pure(d));
  }
  double total = 0;
  for (auto& [w, s] : mix) total += w;
  for (auto& [w, s] : mix) w /= total;
  return ClassicalStrategy::mixture(mix);
}

QuantumStrategy random_projective_strategy(const Field& F, std::size_t n, std::size_t d, Rng& rng) {
  QuantumStrategy s;
  s.field = &F;
  s.n = n;
  s.r = 2;
  s.d = d;
  s.psi = random_state(d * d, rng);
  PovmFamily fam;
  for (std::uint64_t x = 0; x < s.points(); ++x) fam.push_back(random_projective(d, F.size(), rng));
  s.families = {fam};
  s.projective = true;
  return s;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("rho norm matches the eigendecomposition of rho") {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 2 + uniform_below(rng, 5);
    const Matrix rho = random_density(d, rng);
    const Matrix a = random_ginibre(d, d, rng);
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    double oracle = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      oracle += es.eigenvalues()[i] * (a.adjoint() * es.eigenvectors().col(i)).squaredNorm();
    CHECK(rho_norm(a, rho) == doctest::Approx(std::sqrt(oracle)).epsilon(1e-12));
    const Matrix b = random_ginibre(d, d, rng);
    CHECK(std::abs(trace_rho(a * b.adjoint(), rho)) <= rho_norm(a, rho) * rho_norm(b, rho) + 1e-12);
  }
}

TEST_CASE("random generators produce valid objects") {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 1 + uniform_below(rng, 6);
    check_density(random_density(d, rng, 1 + uniform_below(rng, d)));
    const Matrix u = random_unitary(d, rng);
    CHECK(max_abs(u * u.adjoint() - Matrix::Identity(d, d)) < 1e-12);
    const Matrix c = random_contraction(d + 1, d, rng);
    CHECK(max_eigenvalue(c.adjoint() * c) <= 1 + 1e-12);
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& p : random_projective(d, 3, rng)) {
      CHECK(max_abs(p * p - p) < 1e-12);
      sum += p;
    }
    CHECK(max_abs(sum - Matrix::Identity(d, d)) < 1e-12);
    sum.setZero();
    for (const auto& p : random_submeasurement(d, 3, rng)) {
      CHECK(is_psd(p));
      sum += p;
    }
    CHECK(max_eigenvalue(sum) <= 1 + 1e-12);
  }
}

TEST_CASE("partial trace against a product state") {
  Rng rng(3);
  const Matrix a = random_density(2, rng), b = random_density(3, rng), c = random_density(2, rng);
  const Matrix rho = kron(kron(a, b), c);
  CHECK(max_abs(partial_trace(rho, {2, 3, 2}, {0, 2}) - kron(a, c)) < 1e-12);
  CHECK(max_abs(partial_trace(rho, {2, 3, 2}, {1}) - b) < 1e-12);
}

TEST_CASE("cons and inc identities on toy instances") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = random_toy_instance(seed);
    CHECK(cons(inst.A, inst.A, inst.rho2) + inc(inst.A, inst.A, inst.rho2) ==
          doctest::Approx(trace_rho_total(inst.A, inst.rho2)).epsilon(1e-10));
    CHECK(trace_rho_total(inst.A, inst.rho2) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(cons(inst.A, inst.R, inst.rho2) + inc(inst.A, inst.R, inst.rho2) ==
          doctest::Approx(trace_rho_total(inst.R, inst.rho2)).epsilon(1e-10));
    // The symmetric state makes the order of the registers irrelevant.
    CHECK(cons(inst.R, inst.A, inst.rho2) == doctest::Approx(cons(inst.A, inst.R, inst.rho2)).epsilon(1e-10));
  }
}

TEST_CASE("a projective family on a maximally entangled state is self-consistent") {
  const Field& F = Field::tower(0);
  Rng rng(4);
  const std::size_t d = 3;
  Vector psi = Vector::Zero(d * d);
  for (std::size_t s = 0; s < d; ++s) psi[static_cast<Eigen::Index>(s * d + s)] = 1 / std::sqrt(double(d));
  SubMeasurementFamily p{&F, 1, 0, d, {}};
  for (std::uint64_t x = 0; x < 4; ++x) {
    const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(random_ginibre(d, d, rng).real()).householderQ();
    std::vector<Matrix> ops(4, Matrix::Zero(d, d));
    for (std::size_t i = 0; i < d; ++i) {
      const Eigen::VectorXcd v = basis.col(static_cast<Eigen::Index>(i)).cast<Complex>();
      ops[uniform_below(rng, 4)] += v * v.adjoint();
    }
    p.ops.push_back(ops);
  }
  std::vector<MultilinearFn> labels;
  for (std::size_t s = 0; s < d; ++s) labels.push_back(ml_from_index(F, 1, uniform_below(rng, ml_count(F, 1))));
  const auto q = classical_family(F, 1, 0, labels);
  CHECK(cons(p, p, psi * psi.adjoint()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(inc(p, p, psi * psi.adjoint()) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cons(q, q, psi * psi.adjoint()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(inc(q, q, psi * psi.adjoint()) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("restrict_index agrees with evaluation") {
  const Field& F = Field::tower(0);
  for (std::uint64_t g = 0; g < ml_count(F, 2); ++g) {
    const auto fn = ml_from_index(F, 2, g);
    for (std::uint64_t v = 0; v < 4; ++v) {
      const Elem val = F.elem(v);
      const auto h = restrict_index(F, 2, g, 1, std::span<const Elem>(&val, 1));
      const auto hf = ml_from_index(F, 1, h);
      for (std::uint64_t u = 0; u < 4; ++u) {
        const std::vector<Elem> pt{F.elem(u), val};
        const std::vector<Elem> pt1{F.elem(u)};
        CHECK(eval_ml(hf, pt1) == eval_ml(fn, pt));
      }
    }
  }
}

TEST_CASE("diagonal embeddings reproduce classical acceptance") {
  const Field& F = Field::tower(0);
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const unsigned r = t % 5 == 0 ? 4 : 3;
    MLGameConfig cfg(r, 1 + t % 2, F);
    const auto cs = random_classical(cfg, rng, t % 3 == 0);
    const auto qs = classical_embedding(cfg, cs);
    validate(qs);
    CHECK(game_value_quantum(cfg, qs) == doctest::Approx(acceptance_exact(cfg, cs)).epsilon(1e-12));
  }
}

TEST_CASE("diagonal embeddings over larger fields") {
  Rng rng(15);
  for (const Field* F : {&Field::custom(3, 0b1011), &Field::custom(4, 0b10011)}) {
    MLGameConfig cfg(3, 1, *F);
    for (int t = 0; t < 3; ++t) {
      const auto cs = random_classical(cfg, rng, t == 0);
      CHECK(game_value_quantum(cfg, classical_embedding(cfg, cs)) ==
            doctest::Approx(acceptance_exact(cfg, cs)).epsilon(1e-12));
    }
  }
}

TEST_CASE("symmetrization preserves the value and is permutation invariant") {
  const Field& F = Field::tower(0);
  Rng rng(6);
  MLGameConfig cfg(3, 1, F);
  for (int t = 0; t < 5; ++t) {
    DeterministicStrategy d;
    for (unsigned j = 0; j < 3; ++j) d.players.push_back(random_table(F, 1, rng));
    auto cs = ClassicalStrategy::mixture({{0.5, ClassicalStrategy::pure(d)},
                                          {0.5, ClassicalStrategy::shared(random_ml_table(F, 1, rng))}});
    const auto qs = rotate_measurements(classical_embedding(cfg, cs), 0.2, 77 + t);
    const auto sym = symmetrize(qs);
    validate(sym);
    CHECK(is_permutation_invariant(sym.psi, sym.d, sym.r));
    CHECK(game_value_quantum(cfg, sym) == doctest::Approx(game_value_quantum(cfg, qs)).epsilon(1e-10));
    // Expectations of symmetric products do not depend on the register order.
    const Matrix& op0 = sym.family(0)[0][1];
    const Matrix& op1 = sym.family(0)[1][2];
    const Complex e1 = expectation(sym.psi, sym.d, sym.r, {&op0, &op1, nullptr});
    const Complex e2 = expectation(sym.psi, sym.d, sym.r, {nullptr, &op0, &op1});
    const Complex e3 = expectation(sym.psi, sym.d, sym.r, {&op1, nullptr, &op0});
    CHECK(std::abs(e1 - e2) < 1e-10);
    CHECK(std::abs(e1 - e3) < 1e-10);
  }
}

TEST_CASE("rotations keep strategies valid and vanish at zero angle") {
  const Field& F = Field::tower(0);
  Rng rng(7);
  MLGameConfig cfg(3, 1, F);
  const auto qs = classical_embedding(cfg, random_classical(cfg, rng, true));
  const double base = game_value_quantum(cfg, qs);
  CHECK(base == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(game_value_quantum(cfg, rotate_measurements(qs, 0.0, 1)) == doctest::Approx(base).epsilon(1e-12));
  for (double theta : {0.05, 0.3, 1.0}) {
    const auto rot = rotate_measurements(qs, theta, 1);
    validate(rot);
    CHECK(game_value_quantum(cfg, rot) <= 1 + 1e-12);
  }
}

TEST_CASE("strategy files round-trip") {
  const Field& F = Field::tower(1);
  Rng rng(8);
  MLGameConfig cfg(3, 1, F);
  const auto qs = rotate_measurements(classical_embedding(cfg, random_classical(cfg, rng, false)), 0.1, 3);
  std::stringstream ss;
  write_strategy(ss, qs);
  const auto back = read_strategy(ss);
  CHECK(back.field == qs.field);
  CHECK(back.n == qs.n);
  CHECK(back.r == qs.r);
  CHECK(back.d == qs.d);
  CHECK(back.projective == qs.projective);
  CHECK((back.psi - qs.psi).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(back.families.size() == qs.families.size());
  for (std::size_t f = 0; f < qs.families.size(); ++f)
    for (std::size_t x = 0; x < qs.families[f].size(); ++x)
      for (std::size_t a = 0; a < qs.families[f][x].size(); ++a)
        CHECK(max_abs(back.families[f][x][a] - qs.families[f][x][a]) == 0.0);
  CHECK(game_value_quantum(cfg, back) == game_value_quantum(cfg, qs));
}

TEST_CASE("lines measurement is complete on random projective strategies") {
  const Field& F = Field::tower(0);
  Rng rng(9);
  for (int t = 0; t < 10; ++t) {
    const auto s = random_projective_strategy(F, 1, 4, rng);
    const auto lines = lines_measurement(s, 0);
    CHECK(lines.completeness_error <= 1e-10);
    for (const auto& row : lines.B)
      for (const auto& b : row) CHECK(is_psd(b));
  }
}

TEST_CASE("lines measurement of a multilinear strategy has no defect") {
  const Field& F = Field::tower(0);
  Rng rng(10);
  for (std::size_t n : {1u, 2u}) {
    MLGameConfig cfg(3, n, F);
    const auto qs = classical_embedding(cfg, random_classical(cfg, rng, true));
    for (std::size_t axis = 0; axis < n; ++axis) {
      const auto lines = lines_measurement(qs, axis);
      CHECK(lines.completeness_error <= 1e-10);
      CHECK(lines.defect <= 1e-10);
    }
  }
}

TEST_CASE("lines measurement defect grows with perturbation") {
  const Field& F = Field::tower(0);
  Rng rng(11);
  MLGameConfig cfg(3, 1, F);
  const auto qs = classical_embedding(cfg, random_classical(cfg, rng, true));
  double prev = lines_measurement(qs, 0).defect;
  CHECK(prev <= 1e-10);
  for (double theta : {0.05, 0.5}) {
    const double defect = lines_measurement(rotate_measurements(qs, theta, 5), 0).defect;
    CHECK(defect > prev);
    prev = defect;
  }
}

TEST_CASE("lines measurement refuses non-projective strategies") {
  const Field& F = Field::tower(0);
  Rng rng(12);
  auto s = random_projective_strategy(F, 1, 2, rng);
  for (auto& ops : s.families[0]) ops = random_povm(2, 4, rng);
  s.projective = false;
  CHECK_THROWS_AS(lines_measurement(s, 0), DomainError);
}

TEST_CASE("self-improvement feasible point") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = random_toy_instance(seed);
    const auto rep = self_improvement_feasible(inst.A, inst.R, inst.rho1);
    CHECK(rep.feasible);
    CHECK(rep.max_violation <= 1e-8);
    const double bound =
        2 * inc(inst.A, inst.R, inst.rho2) + 8 * std::sqrt(std::max(0.0, inc(inst.A, inst.A, inst.rho2)));
    CHECK(rep.objective <= bound + 1e-6);
  }
}

TEST_CASE("self-improvement solver descends monotonically") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = random_toy_instance(seed, 3);
    const auto sol = self_improvement_solve(inst.A, inst.R, inst.rho1, 30);
    CHECK(sol.monotone);
    CHECK(sol.max_violation <= 1e-8);
    CHECK(sol.objective.back() <= sol.objective.front() + 1e-12);
  }
}

TEST_CASE("self-improvement solver reaches zero on a commuting instance") {
  const Field& F = Field::tower(0);
  Rng rng(13);
  const std::size_t d = 3, n = 2;
  std::vector<MultilinearFn> labels;
  for (std::size_t s = 0; s < d; ++s) labels.push_back(ml_from_index(F, n, uniform_below(rng, ml_count(F, n))));
  const auto a = classical_family(F, n, 0, labels);
  auto r = classical_family(F, n, 1, labels);
  for (auto& row : r.ops)
    for (auto& op : row) op *= 0.7;
  Matrix rho = Matrix::Zero(d, d);
  rho.diagonal() << 0.5, 0.3, 0.2;
  const SFamily zero(a.tails(), std::vector<Matrix>(ml_count(F, 1), Matrix::Zero(d, d)));
  const auto sol = self_improvement_solve(a, r, rho, 2000, zero);
  CHECK(sol.monotone);
  CHECK(sol.objective.back() <= 1e-8);
}

TEST_CASE("pasting stays a sub-measurement") {
  for (double eta : {0.2, 0.1}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto inst = random_toy_instance(seed);
      const auto& t = inst.R.arity < inst.R.n ? inst.R : inst.A;
      const auto res = pasting(t, eta);
      validate(res.V, 1e-10);
      CHECK(res.V.arity == t.arity + 1);
      CHECK(res.max_eigenvalue <= 1 + 1e-10);
    }
  }
}

TEST_CASE("pasting a classical family rescales it") {
  const Field& F = Field::tower(0);
  Rng rng(14);
  const std::size_t d = 4, n = 2;
  std::vector<MultilinearFn> labels;
  for (std::size_t s = 0; s < d; ++s) labels.push_back(ml_from_index(F, n, uniform_below(rng, ml_count(F, n))));
  for (std::size_t k : {0u, 1u}) {
    const auto res = pasting(classical_family(F, n, k, labels), 0.2);
    const auto expect = classical_family(F, n, k + 1, labels);
    REQUIRE(res.V.ops.size() == expect.ops.size());
    for (std::size_t tail = 0; tail < expect.ops.size(); ++tail)
      for (std::size_t g = 0; g < expect.ops[tail].size(); ++g)
        CHECK(max_abs(res.V.ops[tail][g] - res.scale * expect.ops[tail][g]) < 1e-10);
  }
}

TEST_CASE("pasting rounds grow as eta shrinks") {
  CHECK_THROWS_AS(pasting_rounds(0.0), ConfigError);
  CHECK_THROWS_AS(pasting_rounds(1.0), ConfigError);
  CHECK(pasting_rounds(0.2) == static_cast<std::size_t>(std::ceil(50 * std::log(5.0))));
  std::size_t prev = 0;
  for (double eta : {0.5, 0.3, 0.2, 0.1, 0.05}) {
    CHECK(pasting_rounds(eta) >= prev);
    prev = pasting_rounds(eta);
  }
}

TEST_CASE("matrix inequality suites hold") {
  for (const auto& rep : lemma_checks(200, 42)) {
    INFO(rep.lemma);
    CHECK(rep.instances == 200);
    CHECK(rep.passed);
    CHECK(rep.max_violation <= kLemmaSlack);
  }
  std::ostringstream csv;
  write_lemma_csv(csv, lemma_checks(3, 1));
  CHECK(csv.str().rfind("lemma,instances,max_violation,worst_seed,passed\n", 0) == 0);
}
