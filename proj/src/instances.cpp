#include "mipsim/instances.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mipsim {

SuccinctGraph::SuccinctGraph(unsigned n, std::vector<Edge> edges) : n_(n) {
  if (n > 16) throw ConfigError("graphs are limited to n <= 16 address bits");
  for (auto [u, v] : edges) {
    if (u == v) throw ConfigError("self-loop at vertex " + std::to_string(u));
    if (u >= vertex_count() || v >= vertex_count()) {
      throw ConfigError("edge endpoint outside {0,1}^" + std::to_string(n));
    }
    edges_.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

bool SuccinctGraph::adjacent(std::uint32_t u, std::uint32_t v) const {
  return std::binary_search(edges_.begin(), edges_.end(), Edge{std::min(u, v), std::max(u, v)});
}

SuccinctGraph SuccinctGraph::triangle() { return SuccinctGraph(2, {{0, 1}, {1, 2}, {0, 2}}); }

SuccinctGraph SuccinctGraph::k4() {
  return SuccinctGraph(2, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
}

SuccinctGraph SuccinctGraph::four_cycle() { return SuccinctGraph(2, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}); }

namespace {

std::uint32_t parse_vertex(const std::string& s, std::size_t line_no) {
  if (s.empty() || s.size() > 16 || s.find_first_not_of("01") != std::string::npos) {
    throw ConfigError("line " + std::to_string(line_no) + ": bad vertex '" + s + "'");
  }
  return static_cast<std::uint32_t>(std::stoul(s, nullptr, 2));
}

std::string vertex_string(std::uint32_t v, unsigned n) {
  std::string s(n, '0');
  for (unsigned j = 0; j < n; ++j)
    if (v >> j & 1) s[n - 1 - j] = '1';
  return s;
}

}  // namespace

SuccinctGraph read_graph(std::istream& in) {
  std::optional<unsigned> n;
  std::vector<SuccinctGraph::Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string a, b, extra;
    if (!(ls >> a)) continue;
    if (!(ls >> b) || (ls >> extra)) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected two tokens");
    }
    if (a == "n") {
      if (n || !edges.empty()) throw ConfigError("line " + std::to_string(line_no) + ": misplaced n header");
      try {
        n = static_cast<unsigned>(std::stoul(b));
      } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line_no) + ": bad n '" + b + "'");
      }
      continue;
    }
    if (a.size() != b.size()) {
      throw ConfigError("line " + std::to_string(line_no) + ": endpoints of different width");
    }
    if (!n) n = static_cast<unsigned>(a.size());
    if (a.size() != *n) throw ConfigError("line " + std::to_string(line_no) + ": width differs from n");
    edges.emplace_back(parse_vertex(a, line_no), parse_vertex(b, line_no));
  }
  if (!n) throw ConfigError("graph file has neither an n header nor edges");
  return SuccinctGraph(*n, std::move(edges));
}

SuccinctGraph read_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file '" + path + "'");
  return read_graph(in);
}

void write_graph(std::ostream& out, const SuccinctGraph& g) {
  out << "n " << g.n() << '\n';
  for (auto [u, v] : g.edges()) out << vertex_string(u, g.n()) << ' ' << vertex_string(v, g.n()) << '\n';
}

ColoringInstance arithmetize(const SuccinctGraph& g) {
  if (g.n() > 6) throw ConfigError("arithmetize supports n <= 6, got " + std::to_string(g.n()));
  ColoringInstance inst;
  inst.r = 2;
  inst.n = g.n();

  using E = ArithExpr;
  const E one = E::constant(1), minus_one = E::constant(-1);
  const E alpha = E::var(inst.alpha_var());
  const E z1 = E::var(inst.z_var(0)), z2 = E::var(inst.z_var(1));
  const E a1 = E::var(inst.a1_var()), a2 = E::var(inst.a2_var());

  auto not_ = [&](const E& x) { return one + minus_one * x; };
  auto range = [&](const E& a) { return E::product({a, a + minus_one, a + minus_one * alpha}); };

  std::vector<E> edge_terms;
  for (auto [u, v] : g.edges()) {
    for (auto [s, t] : {std::pair{u, v}, std::pair{v, u}}) {
      std::vector<E> factors;
      for (unsigned j = 0; j < g.n(); ++j) {
        const E b1 = E::var(inst.b1_var(j)), b2 = E::var(inst.b2_var(j));
        factors.push_back(s >> j & 1 ? b1 : not_(b1));
        factors.push_back(t >> j & 1 ? b2 : not_(b2));
      }
      edge_terms.push_back(E::product(std::move(factors)));
    }
  }
  const E delta = a1 + a2;
  const E same_color = E::product({delta + one, delta + alpha, delta + alpha + one});
  const E edge_part = edge_terms.empty() ? E::constant(0) : E::product({z1, E::sum(edge_terms), same_color});

  inst.f = (not_(z1) * (not_(z2) * range(a1) + z2 * range(a2)) + edge_part).with_arity(inst.arity());
  inst.d_f = degree_per_var(inst.f);
  return inst;
}

bool verify_assignment(const ColoringInstance& inst, const Assignment& a, const Elem& alpha) {
  if (alpha.is_zero() || alpha.is_one()) throw DomainError("alpha must lie outside {0, 1}");
  const Field& F = alpha.field();
  if (a.size() != (std::size_t{1} << inst.n)) {
    throw DomainError("assignment has " + std::to_string(a.size()) + " entries, expected 2^" +
                      std::to_string(inst.n));
  }
  const ExprProgram prog(inst.f);
  std::vector<Elem> point(inst.arity(), F.zero());
  point[inst.alpha_var()] = alpha;
  const std::size_t nv = std::size_t{1} << inst.n;
  for (std::size_t z = 0; z < (std::size_t{1} << inst.r); ++z) {
    for (std::size_t i = 0; i < inst.r; ++i) point[inst.z_var(i)] = F.elem(z >> i & 1);
    for (std::size_t u = 0; u < nv; ++u) {
      for (std::size_t v = 0; v < nv; ++v) {
        for (unsigned j = 0; j < inst.n; ++j) {
          point[inst.b1_var(j)] = F.elem(u >> j & 1);
          point[inst.b2_var(j)] = F.elem(v >> j & 1);
        }
        point[inst.a1_var()] = a[u];
        point[inst.a2_var()] = a[v];
        if (!prog(F, point).is_zero()) return false;
      }
    }
  }
  return true;
}

namespace {

void check_coloring_guard(const SuccinctGraph& g) {
  if (g.vertex_count() > 16) {
    throw SizeGuardError("exhaustive coloring search needs 2^n <= 16, got 2^" + std::to_string(g.n()));
  }
}

std::size_t monochromatic_edges(const SuccinctGraph& g, const Coloring& c) {
  std::size_t bad = 0;
  for (auto [u, v] : g.edges()) bad += c[u] == c[v];
  return bad;
}

// Visits every coloring in base-3 counting order.
template <class Visit>
void for_each_coloring(const SuccinctGraph& g, Visit&& visit) {
  Coloring c(g.vertex_count(), 0);
  for (;;) {
    if (!visit(c)) return;
    std::size_t i = 0;
    while (i < c.size() && c[i] == 2) c[i++] = 0;
    if (i == c.size()) return;
    ++c[i];
  }
}

}  // namespace

std::optional<Coloring> is_3colorable(const SuccinctGraph& g) {
  check_coloring_guard(g);
  std::optional<Coloring> found;
  for_each_coloring(g, [&](const Coloring& c) {
    if (monochromatic_edges(g, c) == 0) found = c;
    return !found;
  });
  return found;
}

std::pair<Coloring, std::size_t> best_improper_coloring(const SuccinctGraph& g) {
  check_coloring_guard(g);
  Coloring best;
  std::size_t best_bad = g.edges().size() + 1;
  for_each_coloring(g, [&](const Coloring& c) {
    const std::size_t bad = monochromatic_edges(g, c);
    if (bad < best_bad) {
      best_bad = bad;
      best = c;
    }
    return best_bad != 0;
  });
  return {best, best_bad};
}

Assignment coloring_to_assignment(const Field& field, const Coloring& c) {
  Assignment a;
  a.reserve(c.size());
  for (int color : c) {
    switch (color) {
      case 0: a.push_back(field.zero()); break;
      case 1: a.push_back(field.one()); break;
      case 2: a.push_back(field.alpha()); break;
      default: throw DomainError("color " + std::to_string(color) + " outside {0,1,2}");
    }
  }
  return a;
}

void write_instance(std::ostream& out, const ColoringInstance& inst) {
  out << "r " << inst.r << " n " << inst.n << " d_f " << inst.d_f << '\n' << inst.f.to_string() << '\n';
}

ColoringInstance read_instance(std::istream& in) {
  std::string kr, kn, kd;
  ColoringInstance inst;
  if (!(in >> kr >> inst.r >> kn >> inst.n >> kd >> inst.d_f) || kr != "r" || kn != "n" || kd != "d_f") {
    throw ConfigError("instance header must read 'r <r> n <n> d_f <d_f>'");
  }
  std::string rest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.pop_back();
  rest.erase(0, rest.find_first_not_of(" \t\r\n"));
  inst.f = ArithExpr::parse(rest).with_arity(inst.arity());
  if (degree_per_var(inst.f) > inst.d_f) throw ConfigError("declared d_f is below the expression's degree");
  return inst;
}

}  // namespace mipsim
