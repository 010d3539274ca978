#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "mipsim/poly.hpp"

using namespace mipsim;

namespace {

const Field& gf4() { return Field::custom(2, 0b111); }

// Monomial-basis oracle: Moebius transform of the cube table (characteristic
// two, so inclusion-exclusion signs disappear), then a dense monomial sum.
Elem monomial_eval(const Field& F, const std::vector<Elem>& table, const std::vector<Elem>& x) {
  const std::size_t n = table.size();
  std::vector<Elem> coeff(n, F.zero());
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t t = 0; t < n; ++t)
      if ((t & s) == t) coeff[s] += table[t];
  Elem acc = F.zero();
  for (std::size_t s = 0; s < n; ++s) {
    Elem term = coeff[s];
    for (std::size_t i = 0; i < x.size(); ++i)
      if (s >> i & 1) term *= x[i];
    acc += term;
  }
  return acc;
}

std::vector<Elem> random_table(const Field& F, std::size_t m, Rng& rng) {
  std::vector<Elem> t;
  for (std::size_t i = 0; i < (std::size_t{1} << m); ++i) t.push_back(F.sample(rng));
  return t;
}

std::vector<Elem> random_point(const Field& F, std::size_t m, Rng& rng) {
  std::vector<Elem> x;
  for (std::size_t i = 0; i < m; ++i) x.push_back(F.sample(rng));
  return x;
}

}  // namespace

TEST_CASE("expression evaluation") {
  const Field& F = Field::tower(1);
  const Elem t = F.alpha();
  auto e = ArithExpr::var(0) * ArithExpr::var(1);
  std::vector<Elem> pt{t, t};
  CHECK(eval_expr(e, pt) == t * t);
  auto two_x = ArithExpr::constant(2) * ArithExpr::var(0);
  std::vector<Elem> one{F.elem(0x17)};
  CHECK(eval_expr(two_x, one).is_zero());

  // R(a) = a (a - 1)(a - alpha) with alpha as variable 1.
  auto a = ArithExpr::var(0);
  auto R = ArithExpr::product({a, a + ArithExpr::constant(-1), a + ArithExpr::constant(-1) * ArithExpr::var(1)});
  std::vector<Elem> root{t, t};
  CHECK(eval_expr(R, root).is_zero());
  std::vector<Elem> wrong{F.one()};
  CHECK_THROWS_AS(eval_expr(R, wrong), DomainError);
}

TEST_CASE("program evaluation matches the tree") {
  const Field& F = Field::tower(1);
  Rng rng(3);
  auto e = ArithExpr::parse("(add (mul (var 0) (var 1) (var 1)) (const 3) (mul (add (var 2) (const 1)) (var 0)))");
  ExprProgram prog(e);
  for (int i = 0; i < 200; ++i) {
    auto x = random_point(F, 3, rng);
    REQUIRE(prog(F, x) == eval_expr(e, x));
  }
}

TEST_CASE("degree bound and serialization") {
  auto x0 = ArithExpr::var(0);
  CHECK(degree_per_var(x0 * x0 * x0) == 3);
  CHECK(degree_per_var(ArithExpr::var(0) + ArithExpr::var(1)) == 1);
  const std::string text = "(mul (var 0) (add (var 1) (const 1)))";
  auto e = ArithExpr::parse(text);
  CHECK(e.to_string() == text);
  CHECK(e.arity() == 2);
  CHECK(e.size() == 6);
  CHECK_THROWS_AS(ArithExpr::parse("(mul (var 0)"), ConfigError);
  CHECK_THROWS_AS(ArithExpr::parse("(pow (var 0))"), ConfigError);
  CHECK(e.with_arity(4).arity() == 4);
  CHECK_THROWS_AS(e.with_arity(1), DomainError);
}

TEST_CASE("multilinear extension") {
  const Field& F = gf4();
  Rng rng(11);
  auto c = F.elem(3);
  auto fc = extend(F, std::vector<Elem>(8, c));
  for (int i = 0; i < 20; ++i) CHECK(eval_ml(fc, random_point(F, 3, rng)) == c);

  auto id = extend(F, {F.zero(), F.one()});
  for (std::uint64_t v = 0; v < 4; ++v) {
    std::vector<Elem> x{F.elem(v)};
    CHECK(eval_ml(id, x) == F.elem(v));
  }

  auto table = random_table(F, 2, rng);
  auto f = extend(F, table);
  for (int i = 0; i < 5; ++i) {
    auto x = random_point(F, 2, rng);
    CHECK(eval_ml(f, x) == monomial_eval(F, table, x));
  }

  // Boolean points reproduce the table.
  const Field& G = Field::tower(1);
  auto tg = random_table(G, 4, rng);
  auto g = extend(G, tg);
  for (std::size_t b = 0; b < 16; ++b) {
    std::vector<Elem> x;
    for (int i = 0; i < 4; ++i) x.push_back(G.elem(b >> i & 1));
    REQUIRE(eval_ml(g, x) == tg[b]);
  }

  // Affine in each coordinate: three values on a coordinate line are collinear.
  for (int trial = 0; trial < 50; ++trial) {
    auto x = random_point(G, 4, rng);
    const std::size_t i = trial % 4;
    auto at = [&](std::uint64_t u) {
      auto y = x;
      y[i] = G.elem(u);
      return eval_ml(g, y);
    };
    const Elem u = G.sample(rng);
    REQUIRE(at(u.bits()) == at(0) + u * (at(1) - at(0)));
  }
  CHECK_THROWS_AS(extend(F, std::vector<Elem>(3, c)), DomainError);
  std::vector<Elem> short_pt{c};
  CHECK_THROWS_AS(eval_ml(f, short_pt), DomainError);
}

TEST_CASE("restriction") {
  const Field& F = Field::tower(1);
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = extend(F, random_table(F, 3, rng));
    auto x = random_point(F, 3, rng);
    const std::size_t var = trial % 3;
    auto r = restrict(f, var, x[var]);
    auto rest = x;
    rest.erase(rest.begin() + static_cast<long>(var));
    REQUIRE(eval_ml(r, rest) == eval_ml(f, x));
  }
  auto table = random_table(F, 2, rng);
  auto f2 = extend(F, table);
  for (std::size_t b = 0; b < 4; ++b) {
    auto r = restrict(restrict(f2, 1, F.elem(b >> 1)), 0, F.elem(b & 1));
    CHECK(r.table().front() == table[b]);
  }
  // Slice oracle: restricting coordinate i to 0 keeps the entries with bit i clear.
  auto t3 = random_table(F, 3, rng);
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<Elem> slice;
    for (std::size_t b = 0; b < 8; ++b)
      if (!(b >> i & 1)) slice.push_back(t3[b]);
    CHECK(restrict(extend(F, t3), i, F.zero()).table() == slice);
  }
  CHECK_THROWS_AS(restrict(f2, 2, F.zero()), DomainError);
}

TEST_CASE("interpolation") {
  const Field& F = Field::tower(1);
  Rng rng(9);
  const Elem a = F.elem(5), b = F.elem(17), c = F.elem(33);
  std::vector<std::pair<Elem, Elem>> two{{a, b}, {c, F.elem(2)}};
  auto line = interpolate(two, 1);
  CHECK(line(a) == b);
  CHECK(line(c) == F.elem(2));
  CHECK(line.degree() <= 1);
  std::vector<std::pair<Elem, Elem>> flat{{F.zero(), c}, {F.one(), c}};
  auto k = interpolate(flat, 1);
  CHECK(k.degree() == 0);
  CHECK(k.coefficients()[0] == c);

  for (int trial = 0; trial < 20; ++trial) {
    UnivariatePoly p(F, random_point(F, 4, rng));
    std::vector<std::pair<Elem, Elem>> pts;
    for (const auto& x : abscissae(F, 4)) pts.emplace_back(x, p(x));
    auto q = interpolate(pts, 3);
    const Elem z = F.sample(rng);
    REQUIRE(q(z) == p(z));
  }
  std::vector<std::pair<Elem, Elem>> dup{{a, b}, {a, c}};
  CHECK_THROWS_AS(interpolate(dup, 2), DomainError);
}

TEST_CASE("zero fraction and Schwartz-Zippel") {
  const Field& F = gf4();
  CHECK(zero_fraction(extend(F, std::vector<Elem>(4, F.zero()))) == Rational(1));
  CHECK(zero_fraction(extend(F, {F.zero(), F.one()})) == Rational(1, 4));
  Rng rng(1);
  for (int i = 0; i < 30; ++i) {
    auto f = ml_from_index(F, 3, uniform_below(rng, ml_count(F, 3) - 1) + 1);
    REQUIRE(zero_fraction(f) <= Rational(3, 4));
  }
}

TEST_CASE("multilinear indexing round-trips") {
  const Field& F = gf4();
  CHECK(ml_count(F, 1) == 16);
  CHECK(ml_count(F, 0) == 4);
  for (std::uint64_t i = 0; i < 256; ++i) REQUIRE(ml_index(ml_from_index(F, 2, i)) == i);
  CHECK_THROWS_AS(ml_count(Field::tower(1), 3), SizeGuardError);
}
