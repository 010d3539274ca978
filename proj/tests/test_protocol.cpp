#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mipsim/protocol.hpp"
#include "mipsim/stats.hpp"

using namespace mipsim;

namespace {

struct Setup {
  SuccinctGraph graph;
  ProtocolConfig config;
  Assignment witness;
};

Setup triangle_setup(const Field& F, std::uint64_t seed = 11) {
  auto g = SuccinctGraph::triangle();
  ProtocolConfig cfg(arithmetize(g), F, seed);
  auto w = coloring_to_assignment(F, *is_3colorable(g));
  return {g, std::move(cfg), std::move(w)};
}

Setup k4_setup(const Field& F, std::uint64_t seed = 11) {
  auto g = SuccinctGraph::k4();
  ProtocolConfig cfg(arithmetize(g), F, seed);
  auto w = coloring_to_assignment(F, best_improper_coloring(g).first);
  return {g, std::move(cfg), std::move(w)};
}

// Brute-force line test: some affine map s*u + t sends (x, y, z) to (a, b, c).
bool collinear_oracle(const Field& F, const Elem& x, const Elem& y, const Elem& z, const Elem& a, const Elem& b,
                      const Elem& c) {
  for (std::uint64_t s = 0; s < F.size(); ++s)
    for (std::uint64_t t = 0; t < F.size(); ++t) {
      const Elem S = F.elem(s), T = F.elem(t);
      if (S * x + T == a && S * y + T == b && S * z + T == c) return true;
    }
  return false;
}

}  // namespace

TEST_CASE("honest provers pass every test on a 3-colorable instance") {
  for (unsigned e : {0u, 1u}) {
    const Field& F = Field::tower(e);
    auto s = triangle_setup(F);
    auto factory = make_uniform_factory(s.config, "honest", s.witness);
    auto provers = factory();
    for (int t = 1; t <= 5; ++t) {
      for (std::uint64_t i = 0; i < 60; ++i) {
        Rng rng(derive_seed(5, t, i));
        const auto rec = run_protocol_test(s.config, provers, static_cast<TestKind>(t), rng, i);
        CHECK_MESSAGE(rec.accepted, test_name(rec.test) << " rejected: " << rec.reason);
      }
    }
  }
}

TEST_CASE("honest strategy refuses an invalid witness") {
  const Field& F = Field::tower(1);
  auto s = k4_setup(F);
  CHECK_THROWS_AS(honest_strategy(s.config, s.witness), ConfigError);
}

TEST_CASE("protocol config needs at least four field elements") {
  CHECK_THROWS_AS(ProtocolConfig(arithmetize(SuccinctGraph::triangle()), Field::custom(1, 0b11)), ConfigError);
}

TEST_CASE("distinct constant answerers fail the consistency test") {
  const Field& F = Field::tower(1);
  auto s = triangle_setup(F);
  StrategyTriple provers{constant_answerer(F.elem(3)), constant_answerer(F.elem(3)), constant_answerer(F.elem(5))};
  for (std::uint64_t i = 0; i < 50; ++i) {
    Rng rng(i);
    const auto rec = run_protocol_test(s.config, provers, TestKind::kConsistency, rng, i);
    CHECK_FALSE(rec.accepted);
    CHECK(rec.reason == "inconsistent_answers");
  }
}

TEST_CASE("equal constants pass consistency and linearity but not the AND tests") {
  const Field& F = Field::tower(1);
  auto s = triangle_setup(F);
  auto factory = make_uniform_factory(s.config, "constant", s.witness, 7);
  auto provers = factory();
  std::uint64_t and_accepts = 0;
  for (std::uint64_t i = 0; i < 300; ++i) {
    Rng rng(i);
    const auto rec = run_protocol(s.config, provers, rng, i);
    if (rec.test == TestKind::kConsistency || rec.test == TestKind::kLinearity) CHECK(rec.accepted);
    else and_accepts += rec.accepted;
  }
  CHECK(and_accepts < 20);
}

TEST_CASE("collinearity check matches brute force over GF(4)") {
  const Field& F = Field::tower(0);
  std::size_t checked = 0;
  for (std::uint64_t x = 0; x < 4; ++x)
    for (std::uint64_t y = 0; y < 4; ++y)
      for (std::uint64_t z = 0; z < 4; ++z) {
        if (x == y || y == z || x == z) continue;
        for (std::uint64_t abc = 0; abc < 64; ++abc) {
          const Elem X = F.elem(x), Y = F.elem(y), Z = F.elem(z);
          const Elem A = F.elem(abc & 3), B = F.elem(abc >> 2 & 3), C = F.elem(abc >> 4);
          CHECK(collinear(X, Y, Z, A, B, C) == collinear_oracle(F, X, Y, Z, A, B, C));
          ++checked;
        }
      }
  CHECK(checked == 24 * 64);
}

TEST_CASE("shared random table is always consistent") {
  const Field& F = Field::tower(1);
  auto s = triangle_setup(F);
  auto provers = make_uniform_factory(s.config, "shared-random", s.witness)();
  std::uint64_t lin_accepts = 0, lin_runs = 0;
  for (std::uint64_t i = 0; i < 400; ++i) {
    Rng rng(i);
    auto rec = run_protocol_test(s.config, provers, TestKind::kConsistency, rng, i);
    CHECK(rec.accepted);
    rec = run_protocol_test(s.config, provers, TestKind::kLinearity, rng, i);
    ++lin_runs;
    lin_accepts += rec.accepted;
  }
  // Three independent values lie on a line with probability 1/p.
  CHECK(static_cast<double>(lin_accepts) / static_cast<double>(lin_runs) < 0.1);
}

TEST_CASE("perturbation rate zero reproduces the honest transcripts") {
  const Field& F = Field::tower(1);
  auto s = triangle_setup(F);
  auto honest = make_uniform_factory(s.config, "honest", s.witness)();
  auto perturbed = make_uniform_factory(s.config, "perturbed", s.witness, 0.0)();
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng r1(i), r2(i);
    auto a = run_protocol(s.config, honest, r1, i).to_json();
    auto b = run_protocol(s.config, perturbed, r2, i).to_json();
    CHECK(a == b);
  }
}

TEST_CASE("perturbed provers are caught at a rate growing with delta") {
  const Field& F = Field::tower(1);
  auto s = triangle_setup(F);
  double prev = 1.0;
  for (double delta : {0.0, 0.2, 0.6}) {
    const auto est = estimate_acceptance(s.config, make_uniform_factory(s.config, "perturbed", s.witness, delta), 1500);
    if (delta == 0.0) CHECK(est.accepts == est.trials);
    CHECK(est.rate() <= prev + 0.03);
    prev = est.rate();
  }
  CHECK(prev < 0.9);
}

TEST_CASE("no-instance provers on K4 are accepted at most 0.8 of the time") {
  const Field& F = Field::tower(1);
  auto s = k4_setup(F);
  const auto est = estimate_acceptance(s.config, make_uniform_factory(s.config, "no-instance", s.witness), 4000);
  CHECK(est.rate() <= 0.8);
  // Lookup tests pass: the answers come from one multilinear function.
  CHECK(est.branch_accepts[0] == est.branch_trials[0]);
  CHECK(est.branch_accepts[1] == est.branch_trials[1]);
}

TEST_CASE("estimates and record streams do not depend on the worker count") {
  const Field& F = Field::tower(1);
  auto s = k4_setup(F, 99);
  auto factory = make_uniform_factory(s.config, "no-instance", s.witness);
  std::vector<std::string> one, three;
  const auto a = estimate_acceptance(s.config, factory, 300, 1, 0.01,
                                     [&](std::uint64_t, const RunRecord& r) { one.push_back(r.to_json().dump()); });
  const auto b = estimate_acceptance(s.config, factory, 300, 3, 0.01,
                                     [&](std::uint64_t, const RunRecord& r) { three.push_back(r.to_json().dump()); });
  CHECK(a.accepts == b.accepts);
  CHECK(a.branch_trials == b.branch_trials);
  CHECK(a.branch_accepts == b.branch_accepts);
  CHECK(one == three);
}

TEST_CASE("sequential repetition follows the product law") {
  const Field& F = Field::tower(1);
  auto s = k4_setup(F, 5);
  auto factory = make_uniform_factory(s.config, "no-instance", s.witness);
  const std::uint64_t N = 3000;
  const double p1 = estimate_acceptance(s.config, factory, N).rate();
  s.config.repetitions = 3;
  const double p3 = estimate_acceptance(s.config, factory, N).rate();
  const double sigma = binomial_sigma(p1 * p1 * p1, N) + 3 * p1 * p1 * binomial_sigma(p1, N);
  CHECK(std::abs(p3 - p1 * p1 * p1) <= 4 * sigma);

  auto provers = factory();
  Rng rng(1);
  std::uint64_t accepts = 0;
  for (std::uint64_t i = 0; i < 500; ++i) accepts += sequential_repeat(s.config, provers, rng, i);
  CHECK(std::abs(static_cast<double>(accepts) / 500 - p1 * p1 * p1) < 0.1);
}

TEST_CASE("every lookup question is uniform on F^n") {
  const Field& F = Field::tower(0);
  auto s = triangle_setup(F);
  auto factory = make_uniform_factory(s.config, "honest", s.witness);
  const auto all = marginal_audit(s.config, factory, 4000);
  for (int p = 0; p < 3; ++p) {
    CHECK(all.counts[p].size() == 16);
    CHECK(all.pvalue[p] > 1e-3);
  }
  for (int t = 1; t <= 5; ++t) {
    const auto one = marginal_audit(s.config, factory, 1500, static_cast<TestKind>(t));
    for (int p = 0; p < 3; ++p) {
      std::uint64_t total = 0;
      for (auto c : one.counts[p]) total += c;
      if (total > 0) CHECK_MESSAGE(one.pvalue[p] > 1e-3, "test " << t << " prover " << p + 1);
    }
  }
}

TEST_CASE("each AND test reads the oracle exactly once with one lookup per side") {
  const Field& F = Field::tower(1);
  auto s = triangle_setup(F);
  auto provers = make_uniform_factory(s.config, "honest", s.witness)();
  for (int t = 3; t <= 5; ++t) {
    Rng rng(t);
    const auto rec = run_protocol_test(s.config, provers, static_cast<TestKind>(t), rng, 0);
    REQUIRE(rec.and_transcript);
    CHECK(rec.oracle_reads == 1);
    CHECK(rec.and_transcript->sumcheck.oracle_reads == 1);
    std::size_t lookups = 0;
    for (int p = 0; p < 3; ++p) {
      lookups += rec.questions[p].size();
      if (p == rec.and_prover) CHECK(rec.questions[p].empty());
    }
    CHECK(lookups == 2);
  }
}

TEST_CASE("a prover's answers depend only on its own questions and shared randomness") {
  const Field& F = Field::tower(1);
  auto s = triangle_setup(F);
  auto factory = make_uniform_factory(s.config, "perturbed", s.witness, 0.3);
  auto provers = factory();
  for (std::uint64_t i = 0; i < 200; ++i) {
    Rng rng(i);
    const auto rec = run_protocol(s.config, provers, rng, 1000 + i);
    for (int p = 0; p < 3; ++p) {
      auto fresh = factory();
      fresh[p]->begin_run(1000 + i);
      for (std::size_t j = 0; j < rec.questions[p].size(); ++j) {
        const auto replay = fresh[p]->lookup(rec.questions[p][j]);
        CHECK(replay == rec.answers[p][j]);
      }
    }
  }
}

TEST_CASE("permuting prover slots leaves acceptance unchanged within confidence") {
  const Field& F = Field::tower(1);
  auto s = triangle_setup(F, 3);
  const std::uint64_t N = 3000;
  auto make = [&](int bad) -> StrategyFactory {
    return [&, bad] {
      StrategyTriple t;
      for (int p = 0; p < 3; ++p)
        t[p] = p == bad ? perturbed_multilinear(s.config, s.witness, 0.5) : honest_strategy(s.config, s.witness);
      return t;
    };
  };
  std::array<Estimate, 3> est;
  for (int bad = 0; bad < 3; ++bad) est[bad] = estimate_acceptance(s.config, make(bad), N);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) CHECK(std::abs(est[i].rate() - est[j].rate()) <= est[i].halfwidth() + est[j].halfwidth());
}

TEST_CASE("run records serialize to JSON") {
  const Field& F = Field::tower(1);
  auto s = triangle_setup(F);
  auto provers = make_uniform_factory(s.config, "honest", s.witness)();
  Rng rng(4);
  const auto j = run_protocol_test(s.config, provers, TestKind::kAndP1, rng, 0).to_json();
  CHECK(j["test"] == 4);
  CHECK(j["and_test"]["prover"] == 1);
  CHECK(j["and_test"]["rounds"].size() == s.config.m());
  CHECK(j["accepted"] == true);
  const auto back = nlohmann::json::parse(j.dump());
  CHECK(back == j);
}

TEST_CASE("field size rule") {
  const Field& F = Field::tower(2);
  auto s = triangle_setup(F);
  CHECK(s.config.field_size_rule(100, 1));
  CHECK_FALSE(s.config.field_size_rule(1e6, 1));
  CHECK_THROWS_AS(s.config.field_size_rule(1, 0), ConfigError);
}
