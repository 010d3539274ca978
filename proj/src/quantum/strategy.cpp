#include "mipsim/quantum/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace mipsim::quantum {

namespace {

std::size_t ipow(std::size_t base, unsigned e) {
  std::size_t out = 1;
  for (unsigned i = 0; i < e; ++i) out *= base;
  return out;
}

void check_state_dim(std::size_t d, unsigned r) {
  double dim = 1;
  for (unsigned i = 0; i < r; ++i) dim *= static_cast<double>(d);
  if (dim > static_cast<double>(kMaxStateDim)) throw SizeGuardError("state dimension d^r above 4096");
}

// Output register i holds input register perm[i].
Vector permute_registers(const Vector& psi, std::size_t d, unsigned r, const std::vector<unsigned>& perm) {
  const std::size_t dim = ipow(d, r);
  Vector out(static_cast<Eigen::Index>(dim));
  std::vector<std::size_t> digits(r), src(r);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    std::size_t t = idx;
    for (unsigned i = r; i-- > 0;) {
      digits[i] = t % d;
      t /= d;
    }
    for (unsigned i = 0; i < r; ++i) src[perm[i]] = digits[i];
    std::size_t s = 0;
    for (unsigned i = 0; i < r; ++i) s = s * d + src[i];
    out[static_cast<Eigen::Index>(idx)] = psi[static_cast<Eigen::Index>(s)];
  }
  return out;
}

// Tr(rho2 (P (x) Q)) for d x d operators P, Q.
double trace_pair(const Matrix& rho2, const Matrix& p, const Matrix& q) {
  const Eigen::Index d = p.rows();
  Complex acc = 0;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index i2 = 0; i2 < d; ++i2) {
        const Complex pv = p(i2, i);
        if (pv == Complex(0)) continue;
        for (Eigen::Index j2 = 0; j2 < d; ++j2) acc += rho2(i * d + j, i2 * d + j2) * pv * q(j2, j);
      }
  return acc.real();
}

std::vector<std::array<unsigned, 3>> referee_triples(unsigned r) {
  std::vector<std::array<unsigned, 3>> out;
  if (r == 3) return {{0, 1, 2}};
  for (unsigned a = 0; a < r; ++a)
    for (unsigned b = 0; b < r; ++b)
      for (unsigned c = 0; c < r; ++c)
        if (a != b && b != c && a != c) out.push_back({a, b, c});
  return out;
}

void check_family_shape(const PovmFamily& fam, std::uint64_t points, std::uint64_t outcomes, std::size_t d) {
  if (fam.size() != points) throw DomainError("POVM family needs one measurement per question");
  for (const auto& povm : fam) {
    if (povm.size() != outcomes) throw DomainError("POVM needs one operator per field element");
    for (const auto& a : povm)
      if (static_cast<std::size_t>(a.rows()) != d || static_cast<std::size_t>(a.cols()) != d) {
        throw DomainError("POVM operator has the wrong dimension");
      }
  }
}

}  // namespace

void validate(const QuantumStrategy& s, double tol) {
  if (s.field == nullptr) throw DomainError("strategy has no field");
  if (s.r < 1 || s.d < 1) throw DomainError("strategy needs r >= 1 and d >= 1");
  check_state_dim(s.d, s.r);
  if (static_cast<std::size_t>(s.psi.size()) != ipow(s.d, s.r)) throw DomainError("state has the wrong dimension");
  if (std::abs(s.psi.norm() - 1) > tol) throw DomainError("state is not normalized");
  if (s.families.size() != 1 && s.families.size() != s.r) throw DomainError("need one shared family or one per player");
  const Matrix id = Matrix::Identity(s.d, s.d);
  for (const auto& fam : s.families) {
    check_family_shape(fam, s.points(), s.field->size(), s.d);
    for (std::size_t x = 0; x < fam.size(); ++x) {
      Matrix total = Matrix::Zero(s.d, s.d);
      for (const auto& a : fam[x]) {
        if (!is_psd(a, tol)) throw DomainError("POVM operator is not PSD at question " + std::to_string(x));
        if (s.projective && (a * a - a).cwiseAbs().maxCoeff() > tol) {
          throw DomainError("operator is not a projector at question " + std::to_string(x));
        }
        total += a;
      }
      if ((total - id).cwiseAbs().maxCoeff() > tol) {
        throw DomainError("POVM does not sum to the identity at question " + std::to_string(x));
      }
    }
  }
  if (s.permutation_invariant && !is_permutation_invariant(s.psi, s.d, s.r, tol)) {
    throw DomainError("state is not invariant under register permutations");
  }
}

Vector apply_local(const Vector& psi, std::size_t d, unsigned r, unsigned reg, const Matrix& op) {
  if (reg >= r) throw DomainError("register out of range");
  const std::size_t left = ipow(d, reg), right = ipow(d, r - reg - 1);
  if (static_cast<std::size_t>(psi.size()) != left * d * right) throw DomainError("state has the wrong dimension");
  using RowMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Vector out(psi.size());
  const auto di = static_cast<Eigen::Index>(d), ri = static_cast<Eigen::Index>(right);
  for (std::size_t l = 0; l < left; ++l) {
    const auto off = static_cast<Eigen::Index>(l * d * right);
    Eigen::Map<const RowMat> in(psi.data() + off, di, ri);
    Eigen::Map<RowMat> res(out.data() + off, di, ri);
    res.noalias() = op * in;
  }
  return out;
}

Complex expectation(const Vector& psi, std::size_t d, unsigned r, const std::vector<const Matrix*>& ops) {
  if (ops.size() != r) throw DomainError("need one operator slot per register");
  Vector phi = psi;
  for (unsigned j = 0; j < r; ++j)
    if (ops[j] != nullptr) phi = apply_local(phi, d, r, j, *ops[j]);
  return psi.dot(phi);
}

Matrix reduced_density(const Vector& psi, std::size_t d, unsigned r, unsigned count) {
  if (count < 1 || count > r) throw DomainError("reduced_density: bad register count");
  using RowMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto rows = static_cast<Eigen::Index>(ipow(d, count));
  const auto cols = static_cast<Eigen::Index>(ipow(d, r - count));
  Eigen::Map<const RowMat> m(psi.data(), rows, cols);
  return m * m.adjoint();
}

Vector swap_registers(const Vector& psi, std::size_t d, unsigned r, unsigned i, unsigned j) {
  std::vector<unsigned> perm(r);
  std::iota(perm.begin(), perm.end(), 0u);
  std::swap(perm.at(i), perm.at(j));
  return permute_registers(psi, d, r, perm);
}

bool is_permutation_invariant(const Vector& psi, std::size_t d, unsigned r, double tol) {
  for (unsigned i = 0; i + 1 < r; ++i)
    if ((swap_registers(psi, d, r, i, i + 1) - psi).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

Vector symmetrize_state(const Vector& psi, std::size_t d, unsigned r) {
  std::vector<unsigned> perm(r);
  std::iota(perm.begin(), perm.end(), 0u);
  Vector acc = Vector::Zero(psi.size());
  do {
    acc += permute_registers(psi, d, r, perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (acc.norm() < 1e-12) throw DomainError("state has no symmetric component");
  return acc / acc.norm();
}

double game_value_quantum(const MLGameConfig& config, const QuantumStrategy& s) {
  if (config.field != s.field || config.n != s.n || config.r != s.r) {
    throw ConfigError("strategy does not match the game's field, n or r");
  }
  validate(s, 1e-8);
  const Field& F = *config.field;
  const std::uint64_t P = config.points(), p = F.size(), k = F.k();
  if (static_cast<double>(P) * static_cast<double>(config.n) * static_cast<double>(p * p) > 1e7) {
    throw SizeGuardError("exact referee enumeration above 10^7 outcomes");
  }
  const std::size_t d = s.d;
  const unsigned r = s.r;

  double cons_term = 0;
  for (std::uint64_t x = 0; x < P; ++x) {
    for (std::uint64_t a = 0; a < p; ++a) {
      Vector phi = s.psi;
      for (unsigned j = 0; j < r; ++j) phi = apply_local(phi, d, r, j, s.family(j)[x][a]);
      cons_term += s.psi.dot(phi).real();
    }
  }
  cons_term /= static_cast<double>(P);

  // Collinear answers satisfy c = (1 + t) a + t b with t = (z - x) / (y - x).
  // Expanding the indicator in additive characters chi_w(v) = (-1)^Tr(w v)
  // turns the p^2 answer pairs per question into p character terms.
  std::vector<int> sign(p * p);
  for (std::uint64_t w = 0; w < p; ++w)
    for (std::uint64_t a = 0; a < p; ++a) {
      std::uint64_t v = F.mul_bits(w, a), tr = 0;
      for (std::uint64_t i = 0; i < k; ++i, v = F.mul_bits(v, v)) tr ^= v;
      sign[w * p + a] = tr == 0 ? 1 : -1;
    }
  const auto fourier = [&](const std::vector<Matrix>& ops) {
    std::vector<Matrix> hat(p, Matrix::Zero(d, d));
    for (std::uint64_t w = 0; w < p; ++w)
      for (std::uint64_t a = 0; a < p; ++a) hat[w] += static_cast<double>(sign[w * p + a]) * ops[a];
    return hat;
  };
  std::vector<std::vector<std::vector<Matrix>>> hats(s.families.size());
  for (std::size_t f = 0; f < s.families.size(); ++f)
    for (std::uint64_t x = 0; x < P; ++x) hats[f].push_back(fourier(s.families[f][x]));
  const auto hat = [&](unsigned j) -> const std::vector<std::vector<Matrix>>& {
    return hats.size() == 1 ? hats[0] : hats.at(j);
  };

  const auto triples = referee_triples(r);
  double lin_term = 0;
  std::vector<Vector> pa(p), u(p * p), v(p);
  for (const auto& [ja, jb, jc] : triples) {
    double acc = 0;
    for (std::size_t i = 0; i < config.n; ++i) {
      const unsigned shift = static_cast<unsigned>(k * i);
      for (std::uint64_t x = 0; x < P; ++x) {
        const std::uint64_t xi = (x >> shift) & F.mask();
        const std::uint64_t base = x ^ (xi << shift);
        for (std::uint64_t w = 0; w < p; ++w) pa[w] = apply_local(s.psi, d, r, ja, hat(ja)[x][w]);
        for (std::uint64_t y = 0; y < p; ++y) {
          if (y == xi) continue;
          const auto& hy = hat(jb)[base | (y << shift)];
          for (std::uint64_t w1 = 0; w1 < p; ++w1)
            for (std::uint64_t w2 = 0; w2 < p; ++w2) u[w1 * p + w2] = apply_local(pa[w1], d, r, jb, hy[w2]);
          const std::uint64_t inv_dy = F.inv_bits(y ^ xi);
          for (std::uint64_t z = 0; z < p; ++z) {
            if (z == xi || z == y) continue;
            const auto& hz = hat(jc)[base | (z << shift)];
            const std::uint64_t t = F.mul_bits(z ^ xi, inv_dy);
            Complex sum = 0;
            for (std::uint64_t w = 0; w < p; ++w) {
              v[w] = apply_local(s.psi, d, r, jc, hz[w]);
              sum += v[w].dot(u[F.mul_bits(w, t ^ 1) * p + F.mul_bits(w, t)]);
            }
            acc += sum.real() / static_cast<double>(p);
          }
        }
      }
    }
    lin_term += acc / static_cast<double>(config.n * P * (p - 1) * (p - 2));
  }
  lin_term /= static_cast<double>(triples.size());
  return (cons_term + lin_term) / 2;
}

QuantumStrategy classical_embedding(const MLGameConfig& config, const ClassicalStrategy& cs) {
  validate(config, cs);
  QuantumStrategy s;
  s.field = config.field;
  s.n = config.n;
  s.r = config.r;
  s.d = cs.components.size();
  check_state_dim(s.d, s.r);
  s.psi = Vector::Zero(static_cast<Eigen::Index>(ipow(s.d, s.r)));
  std::size_t diag_step = 0;
  for (unsigned j = 0; j < s.r; ++j) diag_step = diag_step * s.d + 1;
  for (std::size_t c = 0; c < s.d; ++c) s.psi[static_cast<Eigen::Index>(c * diag_step)] = std::sqrt(cs.weights[c]);
  bool shared = true;
  for (const auto& comp : cs.components) shared &= comp.players.size() == 1;
  const unsigned count = shared ? 1 : s.r;
  const std::uint64_t p = config.field->size();
  for (unsigned j = 0; j < count; ++j) {
    PovmFamily fam(config.points(), std::vector<Matrix>(p, Matrix::Zero(s.d, s.d)));
    for (std::uint64_t x = 0; x < config.points(); ++x)
      for (std::size_t c = 0; c < s.d; ++c) {
        const auto i = static_cast<Eigen::Index>(c);
        fam[x][cs.components[c].player(j).values[x]](i, i) = 1;
      }
    s.families.push_back(std::move(fam));
  }
  s.projective = true;
  s.permutation_invariant = true;
  return s;
}

QuantumStrategy symmetrize(const QuantumStrategy& s) {
  validate(s);
  const std::size_t d = s.d;
  const unsigned r = s.r;
  const std::size_t d2 = r * d;
  check_state_dim(d2, r);
  QuantumStrategy out;
  out.field = s.field;
  out.n = s.n;
  out.r = r;
  out.d = d2;
  out.projective = s.projective;
  out.permutation_invariant = true;
  out.psi = Vector::Zero(static_cast<Eigen::Index>(ipow(d2, r)));

  std::vector<unsigned> sigma(r);
  std::iota(sigma.begin(), sigma.end(), 0u);
  double count = 0;
  std::vector<std::size_t> data(r);
  do {
    // Data position i holds original register sigma(i).
    const Vector moved = permute_registers(s.psi, d, r, sigma);
    for (std::size_t idx = 0; idx < ipow(d, r); ++idx) {
      std::size_t t = idx;
      for (unsigned i = r; i-- > 0;) {
        data[i] = t % d;
        t /= d;
      }
      std::size_t target = 0;
      for (unsigned i = 0; i < r; ++i) target = target * d2 + sigma[i] * d + data[i];
      out.psi[static_cast<Eigen::Index>(target)] += moved[static_cast<Eigen::Index>(idx)];
    }
    ++count;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  out.psi /= std::sqrt(count);

  PovmFamily fam(s.points(), std::vector<Matrix>(s.field->size(), Matrix::Zero(d2, d2)));
  for (std::uint64_t x = 0; x < s.points(); ++x)
    for (std::uint64_t a = 0; a < s.field->size(); ++a)
      for (unsigned j = 0; j < r; ++j) {
        const auto off = static_cast<Eigen::Index>(j * d);
        fam[x][a].block(off, off, d, d) = s.family(j)[x][a];
      }
  out.families.push_back(std::move(fam));
  return out;
}

QuantumStrategy rotate_measurements(const QuantumStrategy& s, double theta, std::uint64_t seed) {
  QuantumStrategy out = s;
  for (std::uint64_t x = 0; x < s.points(); ++x) {
    Rng rng(derive_seed(seed, 11, x));
    const Matrix u = unitary_exp(random_hermitian(s.d, rng), theta);
    for (auto& fam : out.families)
      for (auto& a : fam[x]) a = hermitian_part(u * a * u.adjoint());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sub-measurement families

std::uint64_t SubMeasurementFamily::tails() const { return std::uint64_t{1} << (field->k() * (n - arity)); }

std::uint64_t SubMeasurementFamily::outcomes() const { return ml_count(*field, arity); }

Matrix SubMeasurementFamily::total(std::uint64_t tail) const {
  Matrix t = Matrix::Zero(d, d);
  for (const auto& op : ops.at(tail)) t += op;
  return t;
}

double SubMeasurementFamily::max_total_eigenvalue() const {
  double worst = 0;
  for (std::uint64_t t = 0; t < tails(); ++t) worst = std::max(worst, max_eigenvalue(total(t)));
  return worst;
}

void validate(const SubMeasurementFamily& f, double tol) {
  if (f.field == nullptr || f.arity > f.n) throw DomainError("sub-measurement family needs arity <= n");
  if (f.ops.size() != f.tails()) throw DomainError("sub-measurement family needs one entry per tail");
  for (std::uint64_t t = 0; t < f.tails(); ++t) {
    if (f.ops[t].size() != f.outcomes()) throw DomainError("sub-measurement needs one operator per outcome");
    for (const auto& op : f.ops[t])
      if (!is_psd(op, tol)) throw DomainError("sub-measurement operator is not PSD");
    if (max_eigenvalue(f.total(t)) > 1 + tol) throw DomainError("sub-measurement operators sum above identity");
  }
}

SubMeasurementFamily as_family(const QuantumStrategy& s, unsigned player) {
  SubMeasurementFamily f{s.field, s.n, 0, s.d, s.family(player)};
  return f;
}

std::uint64_t restrict_index(const Field& field, std::size_t arity, std::uint64_t g, std::size_t from,
                             std::span<const Elem> values) {
  if (from + values.size() != arity) throw DomainError("restrict_index: wrong number of fixed values");
  if (values.empty()) return g;
  MultilinearFn f = ml_from_index(field, arity, g);
  for (const Elem& v : values) f = restrict(f, from, v);
  if (from == 0) return f.table()[0].bits();
  return ml_index(f);
}

namespace {

struct PairPlan {
  const SubMeasurementFamily* low;   // smaller arity, first register
  const SubMeasurementFamily* high;  // larger arity, second register
};

PairPlan plan(const SubMeasurementFamily& p, const SubMeasurementFamily& q, const Matrix& rho2) {
  if (p.field != q.field || p.n != q.n || p.d != q.d) throw DomainError("families differ in field, n or d");
  if (static_cast<std::size_t>(rho2.rows()) != p.d * p.d) throw DomainError("rho2 must act on two registers");
  return p.arity <= q.arity ? PairPlan{&p, &q} : PairPlan{&q, &p};
}

template <class Op>
double pair_sum(const PairPlan& pl, const Matrix& rho2, Op op_for) {
  const Field& F = *pl.low->field;
  const std::size_t k = pl.low->arity, l = pl.high->arity;
  const std::uint64_t mids = std::uint64_t{1} << (F.k() * (l - k));
  // restricted[mid][g] = index of g with coordinates k+1..l fixed to mid.
  std::vector<std::vector<std::uint64_t>> restricted(mids, std::vector<std::uint64_t>(pl.high->outcomes()));
  for (std::uint64_t mid = 0; mid < mids; ++mid) {
    const auto vals = point_from_index(F, l - k, mid);
    for (std::uint64_t g = 0; g < pl.high->outcomes(); ++g) restricted[mid][g] = restrict_index(F, l, g, k, vals);
  }
  double acc = 0;
  for (std::uint64_t tail = 0; tail < pl.low->tails(); ++tail) {
    const std::uint64_t mid = tail & (mids - 1);
    const std::uint64_t qt = tail >> (F.k() * (l - k));
    for (std::uint64_t g = 0; g < pl.high->outcomes(); ++g) {
      acc += trace_pair(rho2, op_for(tail, restricted[mid][g]), pl.high->ops[qt][g]);
    }
  }
  return acc / static_cast<double>(pl.low->tails());
}

}  // namespace

double cons(const SubMeasurementFamily& p, const SubMeasurementFamily& q, const Matrix& rho2) {
  const PairPlan pl = plan(p, q, rho2);
  return pair_sum(pl, rho2, [&](std::uint64_t tail, std::uint64_t h) -> const Matrix& { return pl.low->ops[tail][h]; });
}

double inc(const SubMeasurementFamily& p, const SubMeasurementFamily& q, const Matrix& rho2) {
  const PairPlan pl = plan(p, q, rho2);
  std::vector<Matrix> totals;
  for (std::uint64_t t = 0; t < pl.low->tails(); ++t) totals.push_back(pl.low->total(t));
  Matrix scratch;
  return pair_sum(pl, rho2, [&](std::uint64_t tail, std::uint64_t h) -> const Matrix& {
    scratch = totals[tail] - pl.low->ops[tail][h];
    return scratch;
  });
}

double trace_rho_total(const SubMeasurementFamily& q, const Matrix& rho2) {
  const Matrix rho_b = partial_trace(rho2, {q.d, q.d}, {1});
  double acc = 0;
  for (std::uint64_t t = 0; t < q.tails(); ++t) acc += trace_rho(q.total(t), rho_b).real();
  return acc / static_cast<double>(q.tails());
}

// ---------------------------------------------------------------------------
// Strategy files

namespace {

void write_entry(std::ostream& out, const Complex& c) { out << c.real() << ',' << c.imag(); }

Complex read_entry(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw ConfigError("strategy file ends early");
  const auto comma = tok.find(',');
  if (comma == std::string::npos) throw ConfigError("strategy entry '" + tok + "' is not a re,im pair");
  try {
    return {std::stod(tok.substr(0, comma)), std::stod(tok.substr(comma + 1))};
  } catch (const std::exception&) {
    throw ConfigError("strategy entry '" + tok + "' is not a re,im pair");
  }
}

void expect_word(std::istream& in, const std::string& word) {
  std::string tok;
  if (!(in >> tok) || tok != word) throw ConfigError("strategy file: expected '" + word + "'");
}

template <class T>
T read_value(std::istream& in, const std::string& key) {
  expect_word(in, key);
  T v{};
  if (!(in >> v)) throw ConfigError("strategy file: bad value for '" + key + "'");
  return v;
}

}  // namespace

void write_strategy(std::ostream& out, const QuantumStrategy& s) {
  out << "quantum-strategy\n";
  out << "field " << s.field->k() << ' ' << s.field->modulus_hex() << '\n';
  out << "n " << s.n << " r " << s.r << " d " << s.d << " families " << s.families.size() << " projective "
      << s.projective << " symmetric " << s.permutation_invariant << '\n';
  out << std::setprecision(17);
  out << "state\n";
  for (Eigen::Index i = 0; i < s.psi.size(); ++i) {
    write_entry(out, s.psi[i]);
    out << '\n';
  }
  for (std::size_t f = 0; f < s.families.size(); ++f)
    for (std::size_t x = 0; x < s.families[f].size(); ++x)
      for (std::size_t a = 0; a < s.families[f][x].size(); ++a) {
        out << "povm " << f << ' ' << x << ' ' << a << '\n';
        const Matrix& m = s.families[f][x][a];
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
          for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ' ';
            write_entry(out, m(i, j));
          }
          out << '\n';
        }
      }
}

QuantumStrategy read_strategy(std::istream& in) {
  expect_word(in, "quantum-strategy");
  QuantumStrategy s;
  expect_word(in, "field");
  unsigned k = 0;
  std::string mod;
  if (!(in >> k >> mod)) throw ConfigError("strategy file: bad field line");
  s.field = &Field::custom(k, std::stoull(mod, nullptr, 16));
  s.n = read_value<std::size_t>(in, "n");
  s.r = read_value<unsigned>(in, "r");
  s.d = read_value<std::size_t>(in, "d");
  const auto families = read_value<std::size_t>(in, "families");
  s.projective = read_value<int>(in, "projective") != 0;
  s.permutation_invariant = read_value<int>(in, "symmetric") != 0;
  if (s.r < 1 || s.d < 1 || s.n < 1 || s.field->k() * s.n > 16) throw ConfigError("strategy file: bad dimensions");
  check_state_dim(s.d, s.r);
  if (families != 1 && families != s.r) throw ConfigError("strategy file: families must be 1 or r");
  expect_word(in, "state");
  s.psi.resize(static_cast<Eigen::Index>(ipow(s.d, s.r)));
  for (Eigen::Index i = 0; i < s.psi.size(); ++i) s.psi[i] = read_entry(in);
  const std::uint64_t p = s.field->size();
  s.families.assign(families, PovmFamily(s.points(), std::vector<Matrix>(p, Matrix::Zero(s.d, s.d))));
  for (std::size_t f = 0; f < families; ++f)
    for (std::uint64_t x = 0; x < s.points(); ++x)
      for (std::uint64_t a = 0; a < p; ++a) {
        expect_word(in, "povm");
        std::size_t ff = 0, xx = 0, aa = 0;
        if (!(in >> ff >> xx >> aa) || ff != f || xx != x || aa != a) {
          throw ConfigError("strategy file: povm blocks out of order");
        }
        Matrix& m = s.families[f][x][a];
        for (Eigen::Index i = 0; i < m.rows(); ++i)
          for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = read_entry(in);
      }
  validate(s, 1e-8);
  return s;
}

}  // namespace mipsim::quantum
