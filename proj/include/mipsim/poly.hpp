#pragma once

// Arithmetic-expression trees and multilinear functions stored as
// boolean-cube tables, plus univariate polynomials.

#include <boost/rational.hpp>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mipsim/field.hpp"

namespace mipsim {

using Rational = boost::rational<std::int64_t>;

// ---------------------------------------------------------------------------
// Arithmetic expressions

enum class ExprKind { kConst, kVar, kAdd, kMul };

/// Immutable arithmetic-expression tree. Leaves are integer constants or
/// variables; internal nodes are n-ary sums and products. Integer constants
/// enter a field through their parity (characteristic two).
class ArithExpr {
 public:
  struct Node {
    ExprKind kind;
    long long value = 0;  // constant value or variable index
    std::vector<std::shared_ptr<const Node>> children;
  };

  static ArithExpr constant(long long c);
  static ArithExpr var(std::size_t index);
  static ArithExpr sum(std::vector<ArithExpr> terms);
  static ArithExpr product(std::vector<ArithExpr> factors);

  /// Declared arity; at least one more than the largest variable index.
  std::size_t arity() const noexcept { return arity_; }
  /// Same tree, declared over `n` variables. Throws DomainError if some
  /// variable index is >= n.
  ArithExpr with_arity(std::size_t n) const;

  const Node& root() const { return *root_; }
  /// Node count plus the bit length of every constant.
  std::size_t size() const;
  /// Degree bound of each variable: Var 1, Const 0, Add max, Mul sum.
  std::vector<std::size_t> degrees() const;

  /// Prefix form, e.g. `(mul (var 0) (add (var 1) (const 1)))`.
  std::string to_string() const;
  static ArithExpr parse(const std::string& text);

  friend ArithExpr operator+(const ArithExpr& a, const ArithExpr& b) { return sum({a, b}); }
  friend ArithExpr operator*(const ArithExpr& a, const ArithExpr& b) { return product({a, b}); }

 private:
  ArithExpr(std::shared_ptr<const Node> root, std::size_t arity)
      : root_(std::move(root)), arity_(arity) {}

  std::shared_ptr<const Node> root_;
  std::size_t arity_ = 0;
};

/// Value of the polynomial represented by `e` at `point`. Throws DomainError
/// if the point length differs from the arity.
Elem eval_expr(const ArithExpr& e, const Field& field, std::span<const Elem> point);
/// As above, taking the field from the (non-empty) point.
Elem eval_expr(const ArithExpr& e, std::span<const Elem> point);

/// max over variables of the per-variable degree bound.
std::size_t degree_per_var(const ArithExpr& e);

/// Flattened post-order form of an expression for repeated evaluation in hot
/// loops. Produces exactly the values of eval_expr.
class ExprProgram {
 public:
  explicit ExprProgram(const ArithExpr& e);
  std::size_t arity() const noexcept { return arity_; }
  Elem operator()(const Field& field, std::span<const Elem> point) const;
  /// Same on raw coefficient bits; `point` must hold arity() reduced values.
  std::uint64_t eval_bits(const Field& field, const std::uint64_t* point) const;

 private:
  struct Op {
    ExprKind kind;
    long long value;        // constant / variable index / child count
  };
  std::vector<Op> ops_;
  std::size_t arity_;
  std::size_t max_stack_ = 0;
};

// ---------------------------------------------------------------------------
// Multilinear functions

/// A multilinear map F^m -> F given by its values on {0,1}^m. Table index
/// bit i holds the value of coordinate i.
class MultilinearFn {
 public:
  MultilinearFn(const Field& field, std::size_t m, std::vector<Elem> table);

  const Field& field() const noexcept { return *field_; }
  std::size_t arity() const noexcept { return m_; }
  const std::vector<Elem>& table() const noexcept { return table_; }

  friend bool operator==(const MultilinearFn& a, const MultilinearFn& b) {
    return a.field_ == b.field_ && a.m_ == b.m_ && a.table_ == b.table_;
  }

 private:
  const Field* field_;
  std::size_t m_;
  std::vector<Elem> table_;
};

/// Multilinear extension of a boolean-cube table of size 2^m.
MultilinearFn extend(const Field& field, std::vector<Elem> table);
/// sum_b table[b] * prod_i (x_i if b_i else 1 - x_i).
Elem eval_ml(const MultilinearFn& f, std::span<const Elem> x);
/// Fixes coordinate `var` to `value`; the result has arity m - 1.
MultilinearFn restrict(const MultilinearFn& f, std::size_t var, const Elem& value);
/// Exact fraction of F^m on which f vanishes. Requires |F|^m <= 2^20.
Rational zero_fraction(const MultilinearFn& f);

/// Encodes a multilinear function as an integer in [0, p^(2^m)) by reading its
/// table as base-p digits (entry 0 least significant). Used to index the
/// outcome sets ML(F^m, F) of measurement families.
std::uint64_t ml_index(const MultilinearFn& f);
MultilinearFn ml_from_index(const Field& field, std::size_t m, std::uint64_t index);
/// |ML(F^m, F)| = p^(2^m); throws SizeGuardError above 2^24.
std::uint64_t ml_count(const Field& field, std::size_t m);

// ---------------------------------------------------------------------------
// Univariate polynomials

class UnivariatePoly {
 public:
  explicit UnivariatePoly(const Field& field, std::vector<Elem> coefficients = {});

  const Field& field() const noexcept { return *field_; }
  /// Coefficient of X^i at position i.
  const std::vector<Elem>& coefficients() const noexcept { return coeffs_; }
  /// Degree after trimming zero leading coefficients; -1 for zero.
  int degree() const;
  Elem operator()(const Elem& x) const;

  friend UnivariatePoly operator+(const UnivariatePoly& a, const UnivariatePoly& b);
  friend UnivariatePoly operator*(const Elem& s, const UnivariatePoly& p);

 private:
  const Field* field_;
  std::vector<Elem> coeffs_;
};

/// Lagrange interpolation through points with distinct abscissae. Throws
/// DomainError on duplicates and ConfigError when more than D+1 points are
/// supplied.
UnivariatePoly interpolate(std::span<const std::pair<Elem, Elem>> points, std::size_t degree_bound);

/// The first `count` field elements 0, 1, t, t+1, ... used as interpolation
/// abscissae.
std::vector<Elem> abscissae(const Field& field, std::size_t count);

}  // namespace mipsim
