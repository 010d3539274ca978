#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "mipsim/instances.hpp"

using namespace mipsim;

namespace {

// Enumerates all assignments of {0,1,alpha} to 2^n vertices.
bool some_assignment_verifies(const ColoringInstance& inst, const Field& F) {
  const std::size_t nv = std::size_t{1} << inst.n;
  Coloring c(nv, 0);
  for (;;) {
    if (verify_assignment(inst, coloring_to_assignment(F, c), F.alpha())) return true;
    std::size_t i = 0;
    while (i < nv && c[i] == 2) c[i++] = 0;
    if (i == nv) return false;
    ++c[i];
  }
}

// Independent properness check straight from the edge list.
bool proper(const SuccinctGraph& g, const Coloring& c) {
  for (auto [u, v] : g.edges())
    if (c[u] == c[v]) return false;
  return true;
}

}  // namespace

TEST_CASE("degree of the arithmetization") {
  auto inst = arithmetize(SuccinctGraph::triangle());
  CHECK(inst.d_f == 3);
  CHECK(inst.d() == 6);
  CHECK(inst.m() == 2 + 2 * 2);
  CHECK(inst.f.arity() == inst.arity());
}

TEST_CASE("empty graph with the zero assignment") {
  const Field& F = Field::tower(1);
  auto inst = arithmetize(SuccinctGraph(2, {}));
  CHECK(verify_assignment(inst, Assignment(4, F.zero()), F.alpha()));
  CHECK(inst.d_f == 3);
}

TEST_CASE("triangle: every input vanishes under a proper coloring") {
  const Field& F = Field::tower(1);
  const auto g = SuccinctGraph::triangle();
  auto witness = is_3colorable(g);
  REQUIRE(witness);
  CHECK(proper(g, *witness));
  auto inst = arithmetize(g);
  auto A = coloring_to_assignment(F, *witness);
  // Direct enumeration of the 2^2 * 2^2 * 2^2 boolean inputs.
  std::vector<Elem> pt(inst.arity(), F.zero());
  pt[inst.alpha_var()] = F.alpha();
  int evaluated = 0;
  for (int z = 0; z < 4; ++z)
    for (std::uint32_t u = 0; u < 4; ++u)
      for (std::uint32_t v = 0; v < 4; ++v) {
        pt[inst.z_var(0)] = F.elem(z & 1);
        pt[inst.z_var(1)] = F.elem(z >> 1);
        for (unsigned j = 0; j < 2; ++j) {
          pt[inst.b1_var(j)] = F.elem(u >> j & 1);
          pt[inst.b2_var(j)] = F.elem(v >> j & 1);
        }
        pt[inst.a1_var()] = A[u];
        pt[inst.a2_var()] = A[v];
        REQUIRE(eval_expr(inst.f, pt).is_zero());
        ++evaluated;
      }
  CHECK(evaluated == 64);
  CHECK(verify_assignment(inst, A, F.alpha()));
}

TEST_CASE("K4 has no vanishing assignment") {
  const auto g = SuccinctGraph::k4();
  CHECK_FALSE(is_3colorable(g));
  for (const Field* F : {&Field::tower(0), &Field::tower(1)}) {
    CHECK_FALSE(some_assignment_verifies(arithmetize(g), *F));
  }
  auto [best, bad] = best_improper_coloring(g);
  CHECK(bad == 1);
  CHECK(best.size() == 4);
}

TEST_CASE("values outside {0,1,alpha} violate the range constraint") {
  const Field& F = Field::tower(1);
  for (const auto& g : {SuccinctGraph::triangle(), SuccinctGraph(2, {})}) {
    auto inst = arithmetize(g);
    Assignment A(4, F.zero());
    A[1] = F.alpha() + F.one();
    CHECK_FALSE(verify_assignment(inst, A, F.alpha()));
  }
}

TEST_CASE("four-cycle uses two colors") {
  auto w = is_3colorable(SuccinctGraph::four_cycle());
  REQUIRE(w);
  CHECK(proper(SuccinctGraph::four_cycle(), *w));
  CHECK(std::count(w->begin(), w->end(), 2) == 0);
}

TEST_CASE("arithmetization agrees with brute-force colorability, n <= 2") {
  // All 64 graphs on 4 vertices, plus all 8 graphs on 2 vertices.
  std::vector<SuccinctGraph::Edge> all4;
  for (std::uint32_t u = 0; u < 4; ++u)
    for (std::uint32_t v = u + 1; v < 4; ++v) all4.emplace_back(u, v);
  for (const Field* F : {&Field::tower(0), &Field::tower(1)}) {
    for (unsigned mask = 0; mask < 64; ++mask) {
      std::vector<SuccinctGraph::Edge> es;
      for (unsigned i = 0; i < 6; ++i)
        if (mask >> i & 1) es.push_back(all4[i]);
      SuccinctGraph g(2, es);
      auto inst = arithmetize(g);
      auto w = is_3colorable(g);
      if (w) {
        REQUIRE(verify_assignment(inst, coloring_to_assignment(*F, *w), F->alpha()));
      }
      REQUIRE(some_assignment_verifies(inst, *F) == w.has_value());
    }
    for (bool edge : {false, true}) {
      SuccinctGraph g = edge ? SuccinctGraph(1, {{0, 1}}) : SuccinctGraph(1, {});
      REQUIRE(some_assignment_verifies(arithmetize(g), *F));
    }
  }
}

TEST_CASE("arithmetization agrees with brute-force colorability on 8 vertices") {
  const Field& F = Field::tower(0);
  Rng rng(21);
  std::vector<SuccinctGraph::Edge> all8;
  for (std::uint32_t u = 0; u < 8; ++u)
    for (std::uint32_t v = u + 1; v < 8; ++v) all8.emplace_back(u, v);
  int yes = 0, no = 0;
  for (int trial = 0; trial < 12; ++trial) {
    std::vector<SuccinctGraph::Edge> es;
    for (const auto& e : all8)
      if (uniform_below(rng, 100) < 45) es.push_back(e);
    SuccinctGraph g(3, es);
    auto inst = arithmetize(g);
    auto w = is_3colorable(g);
    REQUIRE(some_assignment_verifies(inst, F) == w.has_value());
    (w ? yes : no)++;
  }
  CHECK(yes > 0);
  CHECK(no > 0);
}

TEST_CASE("graph and instance files round-trip") {
  std::istringstream in("# triangle\nn 2\n00 01\n01 10\n00 10\n");
  auto g = read_graph(in);
  CHECK(g.edges() == SuccinctGraph::triangle().edges());
  std::ostringstream out;
  write_graph(out, g);
  std::istringstream back(out.str());
  CHECK(read_graph(back).edges() == g.edges());

  std::istringstream bad("00 00\n");
  CHECK_THROWS_AS(read_graph(bad), ConfigError);
  std::istringstream ragged("00 1\n");
  CHECK_THROWS_AS(read_graph(ragged), ConfigError);

  auto inst = arithmetize(g);
  std::ostringstream dump;
  write_instance(dump, inst);
  std::istringstream dump_in(dump.str());
  auto again = read_instance(dump_in);
  CHECK(again.f.to_string() == inst.f.to_string());
  CHECK(again.d_f == 3);
  CHECK_THROWS_AS(arithmetize(SuccinctGraph(7, {})), ConfigError);
  CHECK_THROWS_AS(is_3colorable(SuccinctGraph(5, {})), SizeGuardError);
}
