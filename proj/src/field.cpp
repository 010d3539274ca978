#include "mipsim/field.hpp"

#include <bit>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>

namespace mipsim {

int poly_degree(std::uint64_t poly) noexcept {
  return poly == 0 ? -1 : 63 - std::countl_zero(poly);
}

std::uint64_t clmul(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t r = 0;
  while (b != 0) {
    if (b & 1) r ^= a;
    b >>= 1;
    a <<= 1;
  }
  return r;
}

std::uint64_t poly_mod(std::uint64_t a, std::uint64_t m) {
  if (m == 0) throw DomainError("poly_mod: zero modulus");
  const int dm = poly_degree(m);
  for (int da = poly_degree(a); da >= dm; da = poly_degree(a)) {
    a ^= m << (da - dm);
  }
  return a;
}

bool is_irreducible(std::uint64_t poly) {
  const int k = poly_degree(poly);
  if (k < 1) return false;
  if (k > static_cast<int>(Field::kMaxDegree)) {
    throw ConfigError("irreducibility check supports degree <= 24, got " + std::to_string(k));
  }
  // Any factorization has a factor of degree <= k/2.
  for (int deg = 1; deg <= k / 2; ++deg) {
    const std::uint64_t lo = std::uint64_t{1} << deg;
    for (std::uint64_t d = lo; d < (lo << 1); ++d) {
      if (poly_mod(poly, d) == 0) return false;
    }
  }
  return true;
}

namespace {

std::uint64_t tower_modulus(unsigned e) {
  std::uint64_t three = 1;
  for (unsigned i = 0; i < e; ++i) three *= 3;
  return (std::uint64_t{1} << (2 * three)) | (std::uint64_t{1} << three) | 1;
}

bool is_tower(unsigned k, std::uint64_t modulus) {
  for (unsigned e = 0;; ++e) {
    std::uint64_t three = 1;
    for (unsigned i = 0; i < e; ++i) three *= 3;
    if (2 * three > k) return false;
    if (2 * three == k) return modulus == tower_modulus(e);
  }
}

std::string to_hex(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << v;
  return os.str();
}

}  // namespace

Field::Field(unsigned k, std::uint64_t modulus, Provenance provenance)
    : k_(k), modulus_(modulus), provenance_(provenance) {}

const Field& Field::intern(unsigned k, std::uint64_t modulus) {
  static std::mutex mu;
  static std::map<std::pair<unsigned, std::uint64_t>, std::unique_ptr<Field>> registry;
  std::lock_guard lock(mu);
  auto key = std::make_pair(k, modulus);
  auto it = registry.find(key);
  if (it != registry.end()) return *it->second;
  if (k < 1 || k > kMaxDegree) {
    throw ConfigError("field degree must be in [1, 24], got " + std::to_string(k));
  }
  if (poly_degree(modulus) != static_cast<int>(k)) {
    throw ConfigError("modulus " + to_hex(modulus) + " does not have degree " + std::to_string(k));
  }
  if (!is_irreducible(modulus)) {
    throw ConfigError("modulus " + to_hex(modulus) + " is reducible over GF(2)");
  }
  const Provenance prov = is_tower(k, modulus) ? Provenance::kTower : Provenance::kCustom;
  auto [pos, _] = registry.emplace(key, std::unique_ptr<Field>(new Field(k, modulus, prov)));
  return *pos->second;
}

const Field& Field::tower(unsigned e) {
  std::uint64_t three = 1;
  for (unsigned i = 0; i < e; ++i) three *= 3;
  if (2 * three > kMaxDegree) {
    throw ConfigError("tower field GF(2^" + std::to_string(2 * three) + ") exceeds degree 24");
  }
  return intern(static_cast<unsigned>(2 * three), tower_modulus(e));
}

const Field& Field::custom(unsigned k, std::uint64_t modulus) { return intern(k, modulus); }

const Field& Field::smallest_irreducible(unsigned k) {
  if (k < 1 || k > kMaxDegree) {
    throw ConfigError("field degree must be in [1, 24], got " + std::to_string(k));
  }
  const std::uint64_t lo = std::uint64_t{1} << k;
  for (std::uint64_t m = lo | 1; m < (lo << 1); m += 2) {
    if (is_irreducible(m)) return intern(k, m);
  }
  throw InvariantViolation("no irreducible polynomial of degree " + std::to_string(k));
}

const Field& Field::from_spec(unsigned k, const std::string& modulus_hex,
                              const std::string& provenance) {
  std::uint64_t modulus = 0;
  try {
    modulus = std::stoull(modulus_hex, nullptr, 16);
  } catch (const std::exception&) {
    throw ConfigError("bad modulus hex '" + modulus_hex + "'");
  }
  const Field& f = intern(k, modulus);
  if (provenance == "tower" && f.provenance() != Provenance::kTower) {
    throw ConfigError("modulus " + modulus_hex + " is not of tower form for k=" + std::to_string(k));
  }
  if (provenance != "tower" && provenance != "custom") {
    throw ConfigError("unknown provenance '" + provenance + "'");
  }
  return f;
}

std::string Field::modulus_hex() const { return to_hex(modulus_); }

std::string Field::provenance_name() const {
  return provenance_ == Provenance::kTower ? "tower" : "custom";
}

std::string Field::name() const { return "GF(2^" + std::to_string(k_) + ")"; }

Elem Field::zero() const { return Elem(*this, 0); }
Elem Field::one() const { return Elem(*this, 1); }

Elem Field::alpha() const {
  if (k_ < 2) throw ConfigError("alpha = t requires a field with more than two elements");
  return Elem(*this, 2);
}

Elem Field::elem(std::uint64_t bits) const {
  if (bits >> k_) {
    throw ConfigError("value " + to_hex(bits) + " does not fit in " + name());
  }
  return Elem(*this, bits);
}

Elem Field::sample(Rng& rng) const { return Elem(*this, rng() & mask()); }

Elem Field::sample_except(Rng& rng, const Elem& excluded) const {
  if (size() < 2) throw DomainError("sample_except on a one-element set");
  for (;;) {
    Elem e = sample(rng);
    if (e != excluded) return e;
  }
}

std::uint64_t Field::inv_bits(std::uint64_t a) const {
  if (a == 0) throw DomainError("division by zero in " + name());
  // Extended Euclid over GF(2)[t].
  std::uint64_t r0 = modulus_, r1 = a;
  std::uint64_t s0 = 0, s1 = 1;
  while (r1 != 0) {
    const int shift_base = poly_degree(r1);
    std::uint64_t q = 0;
    while (poly_degree(r0) >= shift_base) {
      const int s = poly_degree(r0) - shift_base;
      q ^= std::uint64_t{1} << s;
      r0 ^= r1 << s;
    }
    std::swap(r0, r1);
    const std::uint64_t s_next = s0 ^ clmul(q, s1);
    s0 = s1;
    s1 = s_next;
  }
  // r0 is now gcd = 1 and s0 * a == 1 mod modulus.
  return poly_mod(s0, modulus_);
}

const Field& Elem::field() const {
  if (field_ == nullptr) throw DomainError("element has no field");
  return *field_;
}

Elem Elem::inv() const { return Elem(field(), field_->inv_bits(bits_)); }

Elem Elem::pow(std::uint64_t e) const {
  Elem base = *this;
  Elem acc = field().one();
  while (e != 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

std::string Elem::hex() const { return to_hex(bits_); }

void Elem::throw_mismatch(const Elem& a, const Elem& b) {
  auto describe = [](const Elem& e) {
    return e.field_ ? e.field_->name() + " mod " + e.field_->modulus_hex() : std::string("<none>");
  };
  throw ConfigError("field mismatch: " + describe(a) + " vs " + describe(b));
}

std::ostream& operator<<(std::ostream& os, const Elem& e) { return os << e.hex(); }

Elem parse_elem(const Field& field, const std::string& text) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &used, 16);
  } catch (const std::exception&) {
    throw ConfigError("bad field literal '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("bad field literal '" + text + "'");
  return field.elem(v);
}

std::uint64_t point_index(std::span<const Elem> point) {
  std::uint64_t idx = 0;
  for (std::size_t i = point.size(); i-- > 0;) {
    idx = (idx << point[i].field().k()) | point[i].bits();
  }
  return idx;
}

std::vector<Elem> point_from_index(const Field& field, std::size_t n, std::uint64_t index) {
  std::vector<Elem> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(field.elem(index & field.mask()));
    index >>= field.k();
  }
  return out;
}

}  // namespace mipsim
