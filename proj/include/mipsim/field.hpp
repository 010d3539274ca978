#pragma once

// Arithmetic in GF(2^k) = GF(2)[t] / (modulus), k <= 24.
//
// Fields are interned: every distinct (k, modulus) pair maps to a single
// immutable Field object that lives for the rest of the process. Elements
// carry a plain pointer to their field.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mipsim/errors.hpp"
#include "mipsim/rng.hpp"

namespace mipsim {

enum class Provenance { kTower, kCustom };

class Elem;

class Field {
 public:
  static constexpr unsigned kMaxDegree = 24;

  /// GF(2^(2*3^e)) with modulus t^(2*3^e) + t^(3^e) + 1.
  static const Field& tower(unsigned e);
  /// Field with an explicitly supplied modulus (bit i = coefficient of t^i).
  /// Throws ConfigError unless the modulus has degree k and is irreducible.
  static const Field& custom(unsigned k, std::uint64_t modulus);
  /// The irreducible polynomial of degree k with the smallest integer encoding.
  static const Field& smallest_irreducible(unsigned k);
  /// Parses the `{k, modulus_hex, provenance}` triple.
  static const Field& from_spec(unsigned k, const std::string& modulus_hex,
                                const std::string& provenance);

  unsigned k() const noexcept { return k_; }
  std::uint64_t modulus() const noexcept { return modulus_; }
  std::uint64_t size() const noexcept { return std::uint64_t{1} << k_; }
  std::uint64_t mask() const noexcept { return size() - 1; }
  Provenance provenance() const noexcept { return provenance_; }
  std::string modulus_hex() const;
  std::string provenance_name() const;
  /// Human-readable name, e.g. "GF(2^6)".
  std::string name() const;

  Elem zero() const;
  Elem one() const;
  /// The distinguished element t. Requires k >= 2 so that t is not in {0, 1}.
  Elem alpha() const;
  /// Element with the given coefficient bits. Throws ConfigError if bits
  /// exceed the field width.
  Elem elem(std::uint64_t bits) const;
  Elem sample(Rng& rng) const;
  /// Uniform element different from `excluded`.
  Elem sample_except(Rng& rng, const Elem& excluded) const;

  // Raw arithmetic on coefficient vectors; inputs must already be reduced.
  std::uint64_t mul_bits(std::uint64_t a, std::uint64_t b) const noexcept {
    // Shift-and-add with reduction folded into each doubling of `a`.
    std::uint64_t r = 0;
    const std::uint64_t top = std::uint64_t{1} << k_;
    while (b != 0) {
      if (b & 1) r ^= a;
      b >>= 1;
      a <<= 1;
      if (a & top) a ^= modulus_;
    }
    return r;
  }
  std::uint64_t inv_bits(std::uint64_t a) const;

 private:
  Field(unsigned k, std::uint64_t modulus, Provenance provenance);
  static const Field& intern(unsigned k, std::uint64_t modulus);

  unsigned k_;
  std::uint64_t modulus_;
  Provenance provenance_;
};

/// Exhaustive trial division by all polynomials of degree 1..k/2.
bool is_irreducible(std::uint64_t poly);
/// Degree of a GF(2)[t] polynomial; -1 for the zero polynomial.
int poly_degree(std::uint64_t poly) noexcept;
/// Carry-less product of two polynomials of degree < 32.
std::uint64_t clmul(std::uint64_t a, std::uint64_t b) noexcept;
/// Remainder of `a` modulo `m` in GF(2)[t].
std::uint64_t poly_mod(std::uint64_t a, std::uint64_t m);

/// An element of a Field. Value type; two elements compare equal only if
/// they belong to the same field and have the same coefficient bits.
class Elem {
 public:
  Elem() = default;
  Elem(const Field& field, std::uint64_t bits) : bits_(bits), field_(&field) {}

  std::uint64_t bits() const noexcept { return bits_; }
  const Field& field() const;
  bool has_field() const noexcept { return field_ != nullptr; }
  bool is_zero() const noexcept { return bits_ == 0; }
  bool is_one() const noexcept { return bits_ == 1; }

  Elem inv() const;
  Elem pow(std::uint64_t e) const;
  Elem square() const { return *this * *this; }

  friend Elem operator+(const Elem& a, const Elem& b) {
    check_same(a, b);
    return Elem(*a.field_, a.bits_ ^ b.bits_);
  }
  // Characteristic two: subtraction is addition.
  friend Elem operator-(const Elem& a, const Elem& b) { return a + b; }
  friend Elem operator-(const Elem& a) { return a; }
  friend Elem operator*(const Elem& a, const Elem& b) {
    check_same(a, b);
    return Elem(*a.field_, a.field_->mul_bits(a.bits_, b.bits_));
  }
  friend Elem operator/(const Elem& a, const Elem& b) { return a * b.inv(); }
  Elem& operator+=(const Elem& o) { return *this = *this + o; }
  Elem& operator-=(const Elem& o) { return *this = *this - o; }
  Elem& operator*=(const Elem& o) { return *this = *this * o; }

  friend bool operator==(const Elem& a, const Elem& b) noexcept {
    return a.field_ == b.field_ && a.bits_ == b.bits_;
  }
  friend bool operator!=(const Elem& a, const Elem& b) noexcept { return !(a == b); }
  friend bool operator<(const Elem& a, const Elem& b) noexcept { return a.bits_ < b.bits_; }

  /// Hex of the coefficient bits (bit i = coefficient of t^i), e.g. "0x9".
  std::string hex() const;

 private:
  static void check_same(const Elem& a, const Elem& b) {
    if (a.field_ != b.field_) [[unlikely]] throw_mismatch(a, b);
  }
  [[noreturn]] static void throw_mismatch(const Elem& a, const Elem& b);

  std::uint64_t bits_ = 0;
  const Field* field_ = nullptr;
};

std::ostream& operator<<(std::ostream& os, const Elem& e);

/// Parses "0x..." (or bare hex) into an element of `field`.
Elem parse_elem(const Field& field, const std::string& text);

/// Integer constant embedded in a field of characteristic two (parity).
inline Elem embed_integer(const Field& field, long long c) {
  return field.elem(static_cast<std::uint64_t>(c & 1));
}

/// Mixed-radix index of a point in F^n (coordinate 0 least significant).
std::uint64_t point_index(std::span<const Elem> point);
std::vector<Elem> point_from_index(const Field& field, std::size_t n, std::uint64_t index);

}  // namespace mipsim
