#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <sstream>

#include "mipsim/smallbias.hpp"
#include "mipsim/stats.hpp"

using namespace mipsim;

namespace {

// Direct enumeration of seeds, evaluating each zeta bit separately.
Rational direct_max_bias(const BiasedSetSpec& spec) {
  std::vector<std::uint64_t> patterns;
  for (std::uint64_t s = 0; s < spec.seed_count(); ++s) {
    const Seed seed = seed_from_index(spec, s);
    std::uint64_t v = 0;
    for (std::uint64_t i = 0; i < spec.K(); ++i) v |= static_cast<std::uint64_t>(zeta(spec, seed, i)) << i;
    patterns.push_back(v);
  }
  std::int64_t worst = 0;
  for (std::uint64_t c = 1; c < (std::uint64_t{1} << spec.K()); ++c) {
    std::int64_t diff = 0;
    for (auto v : patterns) diff += (std::popcount(c & v) & 1) ? -1 : 1;
    worst = std::max<std::int64_t>(worst, diff < 0 ? -diff : diff);
  }
  return Rational(worst, static_cast<std::int64_t>(spec.seed_count()));
}

Rational direct_zero_mass(const BiasedSetSpec& spec, const std::vector<Elem>& c) {
  std::int64_t zeros = 0;
  for (std::uint64_t s = 0; s < spec.seed_count(); ++s) {
    const Seed seed = seed_from_index(spec, s);
    Elem acc = c[0].field().zero();
    for (std::uint64_t i = 0; i < spec.K(); ++i)
      if (zeta(spec, seed, i)) acc += c[i];
    zeros += acc.is_zero();
  }
  return Rational(zeros, static_cast<std::int64_t>(spec.seed_count()));
}

}  // namespace

TEST_CASE("zero y gives the zero vector") {
  BiasedSetSpec spec(3, 6);
  const Field& F = spec.seed_field();
  for (std::uint64_t x = 0; x < 64; ++x) CHECK(zeta_bits(spec, {F.elem(x), F.zero()}) == 0);
}

TEST_CASE("exhaustive bias of small powering sets") {
  BiasedSetSpec tiny(1, 3);
  CHECK(direct_max_bias(tiny) <= Rational(1, 8));
  CHECK(bias_bound_check(tiny) == direct_max_bias(tiny));

  BiasedSetSpec spec(3, 6);
  const Rational b = bias_bound_check(spec);
  CHECK(b <= Rational(7, 64));
  CHECK(b == direct_max_bias(spec));
  CHECK(bias_spectrum(spec)[0] == 4096);  // c = 0 has bias 1
}

TEST_CASE("bias bound holds for every spec with K <= 16, mprime <= 8") {
  for (unsigned k = 0; k <= 4; ++k)
    for (unsigned mp = 1; mp <= 8; ++mp) {
      BiasedSetSpec spec(k, mp);
      INFO("k=" << k << " mprime=" << mp);
      REQUIRE(bias_bound_check(spec) <= spec.bias_bound());
    }
  CHECK_THROWS_AS(bias_bound_check(BiasedSetSpec(5, 6)), SizeGuardError);
}

TEST_CASE("quarter-bias spec sizes") {
  CHECK(quarter_bias_spec(3).mprime == 5);
  CHECK(quarter_bias_spec(6).mprime == 8);
  CHECK(quarter_bias_spec(1).mprime == 2);
  for (unsigned k = 1; k <= 6; ++k) CHECK(quarter_bias_spec(k).bias_bound() <= Rational(1, 4));
}

TEST_CASE("zero mass") {
  BiasedSetSpec spec(3, 6);
  const Field& G2 = Field::custom(1, 0b11);
  const Field& G4 = Field::tower(0);
  const Rational ceiling = (Rational(1) + Rational(7, 64)) / 2;
  const auto spectrum = bias_spectrum(spec);

  // A single GF(2) component reduces to the bias of that pattern.
  for (std::uint64_t i = 0; i < 8; ++i) {
    std::vector<Elem> c(8, G2.zero());
    c[i] = G2.one();
    const Rational expected = (Rational(1) + Rational(spectrum[std::size_t{1} << i], 4096)) / 2;
    CHECK(zero_mass(spec, c) == expected);
  }
  std::vector<Elem> ones(8, G2.one());
  CHECK(zero_mass(spec, ones) <= ceiling);
  CHECK(zero_mass(spec, ones) == direct_zero_mass(spec, ones));

  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Elem> c;
    for (int i = 0; i < 8; ++i) c.push_back(G4.sample(rng));
    if (std::all_of(c.begin(), c.end(), [](const Elem& e) { return e.is_zero(); })) continue;
    const Rational z = zero_mass(spec, c);
    CHECK(z == direct_zero_mass(spec, c));
    CHECK(z <= ceiling);
  }
  CHECK_THROWS_AS(zero_mass(spec, std::vector<Elem>(8, G2.zero())), DomainError);
}

TEST_CASE("no-instance summands vanish against at most 5/8 of seeds") {
  const Field& G4 = Field::tower(0);
  for (unsigned k = 1; k <= 3; ++k) {
    BiasedSetSpec spec = quarter_bias_spec(k);
    const std::uint64_t K = spec.K();
    // All nonzero vectors over GF(4)^K.
    for (std::uint64_t idx = 1; idx < (std::uint64_t{1} << (2 * K)); ++idx) {
      std::vector<Elem> c;
      for (std::uint64_t i = 0; i < K; ++i) c.push_back(G4.elem(idx >> (2 * i) & 3));
      REQUIRE(zero_mass(spec, c) <= Rational(5, 8));
    }
  }
}

TEST_CASE("AND test completeness") {
  const Field& F = Field::tower(1);
  Rng rng(10);
  AndTestParams zero_params(F, 3, 2);
  Oracle zero = [&](std::span<const Elem>) { return F.zero(); };
  for (int i = 0; i < 50; ++i) {
    auto t = run_and_test(zero_params, zero, honest_and_prover(zero_params, zero), rng);
    REQUIRE(t.accepted());
  }

  // x1(x1 - 1) vanishes on the cube but nowhere near everywhere.
  AndTestParams params(F, 1, 2);
  Oracle h = [&](std::span<const Elem> x) { return x[0] * (x[0] - F.one()); };
  int runs = 0;
  for (std::uint64_t s = 0; s < params.spec.seed_count(); ++s)
    for (std::uint64_t q = 0; q < 64; ++q) {
      std::vector<Elem> qv{F.elem(q)};
      auto t = run_and_test_at(params, h, honest_and_prover(params, h), seed_from_index(params.spec, s), qv);
      REQUIRE(t.accepted());
      REQUIRE(t.sumcheck.oracle_reads == 1);
      ++runs;
    }
  CHECK(runs == 16 * 64);
}

TEST_CASE("honest AND prover matches the generic honest prover") {
  const Field& F = Field::tower(1);
  Rng rng(12);
  AndTestParams params(F, 3, 2);
  std::vector<Elem> coeffs;
  for (int i = 0; i < 27; ++i) coeffs.push_back(F.sample(rng));
  Oracle h = [coeffs, &F](std::span<const Elem> x) {
    Elem acc = F.zero();
    for (int i = 0; i < 27; ++i) acc += coeffs[i] * x[0].pow(i % 3) * x[1].pow(i / 3 % 3) * x[2].pow(i / 9);
    return acc;
  };
  for (int trial = 0; trial < 20; ++trial) {
    const Seed seed = sample_seed(params.spec, rng);
    const auto Z = zeta_extension(F, params.spec, seed);
    Oracle H = [&](std::span<const Elem> x) { return eval_ml(Z, x) * h(x); };
    auto fast = honest_and_prover(params, h)(seed);
    auto slow = honest_prover(F, 3, 3, H);
    std::vector<Elem> prefix;
    for (int j = 0; j < 3; ++j) {
      auto a = fast(prefix), b = slow(prefix);
      for (int e = 0; e < 10; ++e) {
        const Elem x = F.sample(rng);
        REQUIRE(a(x) == b(x));
      }
      prefix.push_back(F.sample(rng));
    }
  }
}

TEST_CASE("AND test soundness against the best-effort cheater") {
  const Field& F = Field::tower(2);
  AndTestParams params(F, 3, 2);
  // Nonzero only at the boolean point (1, 0, 1).
  Oracle h = [&](std::span<const Elem> x) { return x[0] * (F.one() - x[1]) * x[2]; };
  Rng rng(2024);
  const int trials = 100000;
  int accepted = 0;
  for (int i = 0; i < trials; ++i) accepted += run_and_test(params, h, best_effort_and_prover(params, h), rng).accepted();
  const double rate = static_cast<double>(accepted) / trials;
  CHECK(rate <= 5.0 / 8 + 3 * binomial_sigma(5.0 / 8, trials));
  // The cheater is only accepted on seeds where zeta at (1,0,1) is 0.
  const Rational mass = zero_mass(params.spec, [&] {
    std::vector<Elem> c(8, F.zero());
    c[0b101] = F.one();
    return c;
  }());
  const double expected = boost::rational_cast<double>(mass);
  CHECK(std::abs(rate - expected) < 5 * binomial_sigma(expected, trials) + 1e-3);
}

TEST_CASE("bias CSV") {
  std::ostringstream os;
  write_bias_csv(os, BiasedSetSpec(3, 6));
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "pattern,bias");
  int rows = 0;
  double worst = 0;
  while (std::getline(in, line)) {
    worst = std::max(worst, std::stod(line.substr(line.find(',') + 1)));
    ++rows;
  }
  CHECK(rows == 255);
  CHECK(worst <= 0.109375);
}
