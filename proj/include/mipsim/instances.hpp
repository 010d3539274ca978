#pragma once

// Desk-scale succinct 3-colorability instances and their arithmetization.
//
// Vertices are n-bit strings; vertex v corresponds to the boolean address
// b with b_j = (v >> j) & 1.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mipsim/field.hpp"
#include "mipsim/poly.hpp"

namespace mipsim {

class SuccinctGraph {
 public:
  using Edge = std::pair<std::uint32_t, std::uint32_t>;

  /// Edges are stored once with the smaller endpoint first. Throws
  /// ConfigError on self-loops or endpoints outside {0,1}^n.
  SuccinctGraph(unsigned n, std::vector<Edge> edges);

  unsigned n() const noexcept { return n_; }
  std::uint32_t vertex_count() const noexcept { return std::uint32_t{1} << n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  bool adjacent(std::uint32_t u, std::uint32_t v) const;

  static SuccinctGraph triangle();
  static SuccinctGraph k4();
  static SuccinctGraph four_cycle();

 private:
  unsigned n_;
  std::vector<Edge> edges_;
};

/// Graph file: an optional `n <bits>` line, then one edge per line given as
/// two binary strings (most significant bit first). `#` starts a comment.
SuccinctGraph read_graph(std::istream& in);
SuccinctGraph read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const SuccinctGraph& g);

/// The triple (r, n, f). Variables of f are ordered alpha, z (r of them),
/// b1 (n), b2 (n), a1, a2.
struct ColoringInstance {
  unsigned r = 2;
  unsigned n = 0;
  ArithExpr f = ArithExpr::constant(0);
  std::size_t d_f = 0;

  std::size_t m() const { return r + 2 * n; }
  std::size_t d() const { return 2 * d_f; }
  std::size_t arity() const { return 1 + r + 2 * n + 2; }

  std::size_t alpha_var() const { return 0; }
  std::size_t z_var(std::size_t i) const { return 1 + i; }
  std::size_t b1_var(std::size_t j) const { return 1 + r + j; }
  std::size_t b2_var(std::size_t j) const { return 1 + r + n + j; }
  std::size_t a1_var() const { return 1 + r + 2 * n; }
  std::size_t a2_var() const { return 2 + r + 2 * n; }
};

/// Values of A on {0,1}^n, indexed by vertex.
using Assignment = std::vector<Elem>;

/// f = (1-z1)[(1-z2) R(a1) + z2 R(a2)] + z1 E(b1,b2) P(a1+a2), with
/// R(a) = a(a-1)(a-alpha) and P(u) = (u+1)(u+alpha)(u+alpha+1). P vanishes
/// exactly on the nonzero differences of {0,1,alpha} and P(0) = alpha(alpha+1).
/// Requires n <= 6.
ColoringInstance arithmetize(const SuccinctGraph& g);

/// True iff f(alpha, z, b1, b2, A(b1), A(b2)) = 0 for all boolean z, b1, b2.
bool verify_assignment(const ColoringInstance& inst, const Assignment& a, const Elem& alpha);

/// Colors in {0,1,2} per vertex.
using Coloring = std::vector<int>;

/// Exhaustive search for a proper 3-coloring. Requires 2^n <= 16.
std::optional<Coloring> is_3colorable(const SuccinctGraph& g);
/// A coloring minimizing the number of monochromatic edges (exhaustive,
/// same guard), together with that number.
std::pair<Coloring, std::size_t> best_improper_coloring(const SuccinctGraph& g);
/// Colors 0, 1, 2 become 0, 1, alpha.
Assignment coloring_to_assignment(const Field& field, const Coloring& c);

/// Header `r n d_f` followed by the serialized expression.
void write_instance(std::ostream& out, const ColoringInstance& inst);
ColoringInstance read_instance(std::istream& in);

}  // namespace mipsim
