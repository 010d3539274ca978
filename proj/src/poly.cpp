#include "mipsim/poly.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <sstream>

namespace mipsim {

// ---------------------------------------------------------------------------
// ArithExpr

namespace {

using NodePtr = std::shared_ptr<const ArithExpr::Node>;

std::size_t max_arity(const std::vector<ArithExpr>& xs) {
  std::size_t a = 0;
  for (const auto& x : xs) a = std::max(a, x.arity());
  return a;
}

void collect_degrees(const ArithExpr::Node& node, std::vector<std::size_t>& out) {
  // out is sized to the arity; computes degrees of this subtree into out.
  switch (node.kind) {
    case ExprKind::kConst:
      std::fill(out.begin(), out.end(), 0);
      return;
    case ExprKind::kVar:
      std::fill(out.begin(), out.end(), 0);
      out[static_cast<std::size_t>(node.value)] = 1;
      return;
    case ExprKind::kAdd:
    case ExprKind::kMul: {
      std::vector<std::size_t> acc(out.size(), 0), child(out.size(), 0);
      for (const auto& c : node.children) {
        collect_degrees(*c, child);
        for (std::size_t i = 0; i < acc.size(); ++i) {
          acc[i] = node.kind == ExprKind::kAdd ? std::max(acc[i], child[i]) : acc[i] + child[i];
        }
      }
      out = std::move(acc);
      return;
    }
  }
}

std::size_t node_size(const ArithExpr::Node& node) {
  std::size_t s = 1;
  if (node.kind == ExprKind::kConst) {
    const unsigned long long mag = node.value < 0 ? 0ULL - static_cast<unsigned long long>(node.value)
                                                  : static_cast<unsigned long long>(node.value);
    s += std::max<std::size_t>(1, static_cast<std::size_t>(std::bit_width(mag)));
  }
  for (const auto& c : node.children) s += node_size(*c);
  return s;
}

void print_node(const ArithExpr::Node& node, std::ostream& os) {
  switch (node.kind) {
    case ExprKind::kConst:
      os << "(const " << node.value << ")";
      return;
    case ExprKind::kVar:
      os << "(var " << node.value << ")";
      return;
    case ExprKind::kAdd:
    case ExprKind::kMul:
      os << (node.kind == ExprKind::kAdd ? "(add" : "(mul");
      for (const auto& c : node.children) {
        os << ' ';
        print_node(*c, os);
      }
      os << ')';
      return;
  }
}

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  ArithExpr parse_all() {
    ArithExpr e = parse_node();
    skip_ws();
    if (pos_ != s_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression parse error at offset " + std::to_string(pos_) + ": " + what);
  }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string word() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a token");
    return s_.substr(start, pos_ - start);
  }
  long long integer() {
    const std::string w = word();
    try {
      std::size_t used = 0;
      long long v = std::stoll(w, &used);
      if (used != w.size()) fail("bad integer '" + w + "'");
      return v;
    } catch (const std::logic_error&) {
      fail("bad integer '" + w + "'");
    }
  }
  ArithExpr parse_node() {
    expect('(');
    const std::string head = word();
    ArithExpr out = ArithExpr::constant(0);
    if (head == "const") {
      out = ArithExpr::constant(integer());
    } else if (head == "var") {
      const long long v = integer();
      if (v < 0) fail("negative variable index");
      out = ArithExpr::var(static_cast<std::size_t>(v));
    } else if (head == "add" || head == "mul") {
      std::vector<ArithExpr> kids;
      skip_ws();
      while (pos_ < s_.size() && s_[pos_] == '(') {
        kids.push_back(parse_node());
        skip_ws();
      }
      if (kids.empty()) fail(head + " needs at least one operand");
      out = head == "add" ? ArithExpr::sum(std::move(kids)) : ArithExpr::product(std::move(kids));
    } else {
      fail("unknown node '" + head + "'");
    }
    expect(')');
    return out;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

ArithExpr ArithExpr::constant(long long c) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::kConst;
  n->value = c;
  return ArithExpr(std::move(n), 0);
}

ArithExpr ArithExpr::var(std::size_t index) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::kVar;
  n->value = static_cast<long long>(index);
  return ArithExpr(std::move(n), index + 1);
}

ArithExpr ArithExpr::sum(std::vector<ArithExpr> terms) {
  if (terms.empty()) return constant(0);
  if (terms.size() == 1) return terms.front();
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::kAdd;
  for (auto& t : terms) n->children.push_back(t.root_);
  return ArithExpr(std::move(n), max_arity(terms));
}

ArithExpr ArithExpr::product(std::vector<ArithExpr> factors) {
  if (factors.empty()) return constant(1);
  if (factors.size() == 1) return factors.front();
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::kMul;
  for (auto& f : factors) n->children.push_back(f.root_);
  return ArithExpr(std::move(n), max_arity(factors));
}

ArithExpr ArithExpr::with_arity(std::size_t n) const {
  const auto deg = degrees();
  for (std::size_t i = n; i < deg.size(); ++i) {
    if (deg[i] != 0) {
      throw DomainError("variable " + std::to_string(i) + " out of declared arity " + std::to_string(n));
    }
  }
  // Variables beyond n with zero degree cannot exist: arity_ is max index + 1.
  if (n < arity_) throw DomainError("declared arity smaller than the largest variable index");
  return ArithExpr(root_, n);
}

std::size_t ArithExpr::size() const { return node_size(*root_); }

std::vector<std::size_t> ArithExpr::degrees() const {
  std::vector<std::size_t> out(arity_, 0);
  collect_degrees(*root_, out);
  return out;
}

std::string ArithExpr::to_string() const {
  std::ostringstream os;
  print_node(*root_, os);
  return os.str();
}

ArithExpr ArithExpr::parse(const std::string& text) { return Parser(text).parse_all(); }

std::size_t degree_per_var(const ArithExpr& e) {
  const auto deg = e.degrees();
  return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
}

namespace {

Elem eval_node(const ArithExpr::Node& node, const Field& field, std::span<const Elem> point) {
  switch (node.kind) {
    case ExprKind::kConst:
      return embed_integer(field, node.value);
    case ExprKind::kVar:
      return point[static_cast<std::size_t>(node.value)];
    case ExprKind::kAdd: {
      Elem acc = field.zero();
      for (const auto& c : node.children) acc += eval_node(*c, field, point);
      return acc;
    }
    case ExprKind::kMul: {
      Elem acc = field.one();
      for (const auto& c : node.children) acc *= eval_node(*c, field, point);
      return acc;
    }
  }
  throw InvariantViolation("unknown expression node");
}

void check_point(std::size_t arity, const Field& field, std::span<const Elem> point) {
  if (point.size() != arity) {
    throw DomainError("point has " + std::to_string(point.size()) + " coordinates, expression arity is " +
                      std::to_string(arity));
  }
  for (const auto& x : point) {
    if (&x.field() != &field) throw ConfigError("point coordinate from a different field");
  }
}

}  // namespace

Elem eval_expr(const ArithExpr& e, const Field& field, std::span<const Elem> point) {
  check_point(e.arity(), field, point);
  return eval_node(e.root(), field, point);
}

Elem eval_expr(const ArithExpr& e, std::span<const Elem> point) {
  if (point.empty()) throw DomainError("cannot infer the field from an empty point");
  return eval_expr(e, point.front().field(), point);
}

ExprProgram::ExprProgram(const ArithExpr& e) : arity_(e.arity()) {
  // Iterative post-order; the stack depth needed during evaluation is tracked
  // so operator() can size its buffer once.
  std::size_t depth = 0;
  auto emit = [&](auto&& self, const ArithExpr::Node& node) -> void {
    if (node.kind == ExprKind::kConst || node.kind == ExprKind::kVar) {
      ops_.push_back({node.kind, node.value});
      max_stack_ = std::max(max_stack_, ++depth);
      return;
    }
    for (const auto& c : node.children) self(self, *c);
    ops_.push_back({node.kind, static_cast<long long>(node.children.size())});
    depth -= node.children.size() - 1;
  };
  emit(emit, e.root());
}

Elem ExprProgram::operator()(const Field& field, std::span<const Elem> point) const {
  check_point(arity_, field, point);
  std::uint64_t small[32];
  std::vector<std::uint64_t> big;
  std::uint64_t* bits = small;
  if (point.size() > 32) {
    big.resize(point.size());
    bits = big.data();
  }
  for (std::size_t i = 0; i < point.size(); ++i) bits[i] = point[i].bits();
  return Elem(field, eval_bits(field, bits));
}

std::uint64_t ExprProgram::eval_bits(const Field& field, const std::uint64_t* point) const {
  std::uint64_t small[64] = {};
  std::vector<std::uint64_t> big;
  std::uint64_t* stack = small;
  if (max_stack_ > 64) {
    big.resize(max_stack_);
    stack = big.data();
  }
  std::size_t top = 0;
  for (const Op& op : ops_) {
    switch (op.kind) {
      case ExprKind::kConst:
        stack[top++] = static_cast<std::uint64_t>(op.value & 1);
        break;
      case ExprKind::kVar:
        stack[top++] = point[op.value];
        break;
      case ExprKind::kAdd: {
        std::uint64_t acc = 0;
        for (long long i = 0; i < op.value; ++i) acc ^= stack[--top];
        stack[top++] = acc;
        break;
      }
      case ExprKind::kMul: {
        std::uint64_t acc = stack[--top];
        for (long long i = 1; i < op.value; ++i) acc = field.mul_bits(acc, stack[--top]);
        stack[top++] = acc;
        break;
      }
    }
  }
  return stack[0];
}

// ---------------------------------------------------------------------------
// Multilinear functions

MultilinearFn::MultilinearFn(const Field& field, std::size_t m, std::vector<Elem> table)
    : field_(&field), m_(m), table_(std::move(table)) {
  if (m >= 40 || table_.size() != (std::size_t{1} << m)) {
    throw DomainError("multilinear table must have 2^" + std::to_string(m) + " entries, got " +
                      std::to_string(table_.size()));
  }
  for (const auto& v : table_) {
    if (&v.field() != field_) throw ConfigError("multilinear table entry from a different field");
  }
}

MultilinearFn extend(const Field& field, std::vector<Elem> table) {
  const std::size_t n = table.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw DomainError("table size " + std::to_string(n) + " is not a power of two");
  }
  return MultilinearFn(field, static_cast<std::size_t>(std::countr_zero(n)), std::move(table));
}

Elem eval_ml(const MultilinearFn& f, std::span<const Elem> x) {
  if (x.size() != f.arity()) {
    throw DomainError("eval_ml: point has " + std::to_string(x.size()) + " coordinates, arity " +
                      std::to_string(f.arity()));
  }
  const Field& F = f.field();
  // Fold coordinate 0 first: it is the lowest table bit.
  std::vector<std::uint64_t> cur(f.table().size());
  for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = f.table()[i].bits();
  std::size_t len = cur.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (&x[i].field() != &F) throw ConfigError("eval_ml: coordinate from a different field");
    const std::uint64_t xi = x[i].bits();
    len >>= 1;
    for (std::size_t j = 0; j < len; ++j) {
      const std::uint64_t lo = cur[2 * j], hi = cur[2 * j + 1];
      // (1 - x) lo + x hi = lo + x (hi - lo)
      cur[j] = lo ^ F.mul_bits(xi, hi ^ lo);
    }
  }
  return Elem(F, cur[0]);
}

MultilinearFn restrict(const MultilinearFn& f, std::size_t var, const Elem& value) {
  if (var >= f.arity()) {
    throw DomainError("restrict: variable " + std::to_string(var) + " out of range for arity " +
                      std::to_string(f.arity()));
  }
  const Field& F = f.field();
  if (&value.field() != &F) throw ConfigError("restrict: value from a different field");
  const std::size_t stride = std::size_t{1} << var;
  std::vector<Elem> out;
  out.reserve(f.table().size() / 2);
  for (std::size_t idx = 0; idx < f.table().size(); ++idx) {
    if (idx & stride) continue;
    const Elem& lo = f.table()[idx];
    const Elem& hi = f.table()[idx | stride];
    out.push_back(lo + value * (hi - lo));
  }
  // Dropping bit `var` from every index keeps the remaining bits in order,
  // which is exactly the iteration order above.
  return MultilinearFn(F, f.arity() - 1, std::move(out));
}

Rational zero_fraction(const MultilinearFn& f) {
  const Field& F = f.field();
  const std::size_t bits = F.k() * f.arity();
  if (bits > 20) {
    throw SizeGuardError("zero_fraction: |F|^m = 2^" + std::to_string(bits) + " exceeds 2^20");
  }
  const std::uint64_t total = std::uint64_t{1} << bits;
  std::int64_t zeros = 0;
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    const auto pt = point_from_index(F, f.arity(), idx);
    if (eval_ml(f, pt).is_zero()) ++zeros;
  }
  return Rational(zeros, static_cast<std::int64_t>(total));
}

std::uint64_t ml_count(const Field& field, std::size_t m) {
  const std::size_t bits = field.k() * (std::size_t{1} << m);
  if (m >= 8 || bits > 24) {
    throw SizeGuardError("|ML(F^" + std::to_string(m) + ", F)| over " + field.name() + " is too large");
  }
  return std::uint64_t{1} << bits;
}

std::uint64_t ml_index(const MultilinearFn& f) {
  ml_count(f.field(), f.arity());
  std::uint64_t idx = 0;
  const unsigned k = f.field().k();
  for (std::size_t i = f.table().size(); i-- > 0;) idx = (idx << k) | f.table()[i].bits();
  return idx;
}

MultilinearFn ml_from_index(const Field& field, std::size_t m, std::uint64_t index) {
  if (index >= ml_count(field, m)) throw DomainError("multilinear index out of range");
  std::vector<Elem> table;
  table.reserve(std::size_t{1} << m);
  for (std::size_t i = 0; i < (std::size_t{1} << m); ++i) {
    table.push_back(field.elem(index & field.mask()));
    index >>= field.k();
  }
  return MultilinearFn(field, m, std::move(table));
}

// ---------------------------------------------------------------------------
// Univariate polynomials

UnivariatePoly::UnivariatePoly(const Field& field, std::vector<Elem> coefficients)
    : field_(&field), coeffs_(std::move(coefficients)) {
  for (const auto& c : coeffs_) {
    if (&c.field() != field_) throw ConfigError("polynomial coefficient from a different field");
  }
}

int UnivariatePoly::degree() const {
  for (std::size_t i = coeffs_.size(); i-- > 0;) {
    if (!coeffs_[i].is_zero()) return static_cast<int>(i);
  }
  return -1;
}

Elem UnivariatePoly::operator()(const Elem& x) const {
  Elem acc = field_->zero();
  for (std::size_t i = coeffs_.size(); i-- > 0;) acc = acc * x + coeffs_[i];
  return acc;
}

UnivariatePoly operator+(const UnivariatePoly& a, const UnivariatePoly& b) {
  if (a.field_ != b.field_) throw ConfigError("adding polynomials over different fields");
  std::vector<Elem> c(std::max(a.coeffs_.size(), b.coeffs_.size()), a.field_->zero());
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c[i] += a.coeffs_[i];
  for (std::size_t i = 0; i < b.coeffs_.size(); ++i) c[i] += b.coeffs_[i];
  return UnivariatePoly(*a.field_, std::move(c));
}

UnivariatePoly operator*(const Elem& s, const UnivariatePoly& p) {
  std::vector<Elem> c = p.coeffs_;
  for (auto& x : c) x = s * x;
  return UnivariatePoly(*p.field_, std::move(c));
}

UnivariatePoly interpolate(std::span<const std::pair<Elem, Elem>> points, std::size_t degree_bound) {
  if (points.empty()) throw DomainError("interpolate: no points");
  if (points.size() > degree_bound + 1) {
    throw ConfigError("interpolate: " + std::to_string(points.size()) + " points exceed degree bound " +
                      std::to_string(degree_bound));
  }
  const Field& F = points.front().first.field();
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (points[i].first == points[j].first) throw DomainError("interpolate: duplicate abscissa");
    }
  }
  const std::size_t n = points.size();
  std::vector<Elem> result(n, F.zero());
  for (std::size_t i = 0; i < n; ++i) {
    // basis_i(X) = prod_{j != i} (X - x_j) / (x_i - x_j)
    std::vector<Elem> basis{F.one()};
    Elem denom = F.one();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      std::vector<Elem> next(basis.size() + 1, F.zero());
      for (std::size_t d = 0; d < basis.size(); ++d) {
        next[d + 1] += basis[d];
        next[d] -= basis[d] * points[j].first;
      }
      basis = std::move(next);
      denom *= points[i].first - points[j].first;
    }
    const Elem scale = points[i].second / denom;
    for (std::size_t d = 0; d < basis.size(); ++d) result[d] += scale * basis[d];
  }
  return UnivariatePoly(F, std::move(result));
}

std::vector<Elem> abscissae(const Field& field, std::size_t count) {
  if (count > field.size()) {
    throw DomainError("requested " + std::to_string(count) + " distinct abscissae in " + field.name());
  }
  std::vector<Elem> xs;
  xs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) xs.push_back(field.elem(i));
  return xs;
}

}  // namespace mipsim
