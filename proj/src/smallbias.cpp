#include "mipsim/smallbias.hpp"

#include <bit>
#include <iomanip>
#include <ostream>

namespace mipsim {

BiasedSetSpec::BiasedSetSpec(unsigned k_, unsigned mprime_)
    : k(k_), mprime(mprime_), seed_field_(nullptr) {
  if (mprime < 1 || mprime > Field::kMaxDegree) {
    throw ConfigError("mprime must lie in [1, 24], got " + std::to_string(mprime));
  }
  if (k > 6) throw ConfigError("index arity k must be <= 6 (K <= 64), got " + std::to_string(k));
  seed_field_ = &Field::smallest_irreducible(mprime);
}

Rational BiasedSetSpec::bias_bound() const {
  return Rational(static_cast<std::int64_t>(K() - 1), std::int64_t{1} << mprime);
}

BiasedSetSpec quarter_bias_spec(unsigned k) {
  const std::uint64_t K = std::uint64_t{1} << k;
  unsigned mprime = 1;
  while (4 * (K - 1) > (std::uint64_t{1} << mprime)) ++mprime;
  return BiasedSetSpec(k, mprime);
}

bool zeta(const BiasedSetSpec& spec, const Seed& seed, std::uint64_t i) {
  if (i >= spec.K()) throw DomainError("zeta index out of range");
  return std::popcount(seed.x.pow(i).bits() & seed.y.bits()) & 1;
}

std::uint64_t zeta_bits(const BiasedSetSpec& spec, const Seed& seed) {
  const Field& F = spec.seed_field();
  std::uint64_t out = 0, pw = 1;
  for (std::uint64_t i = 0; i < spec.K(); ++i) {
    out |= static_cast<std::uint64_t>(std::popcount(pw & seed.y.bits()) & 1) << i;
    pw = F.mul_bits(pw, seed.x.bits());
  }
  return out;
}

Seed seed_from_index(const BiasedSetSpec& spec, std::uint64_t index) {
  const Field& F = spec.seed_field();
  return {F.elem(index & F.mask()), F.elem((index >> spec.mprime) & F.mask())};
}

Seed sample_seed(const BiasedSetSpec& spec, Rng& rng) {
  const Field& F = spec.seed_field();
  Elem x = F.sample(rng);
  Elem y = F.sample(rng);
  return {x, y};
}

namespace {

void check_exhaustive_guard(const BiasedSetSpec& spec) {
  if (spec.K() > 16 || 2 * spec.mprime > 16) {
    throw SizeGuardError("exhaustive bias enumeration needs K <= 16 and 2*mprime <= 16");
  }
}

// Number of seeds producing each zeta pattern.
std::vector<std::int64_t> pattern_histogram(const BiasedSetSpec& spec) {
  std::vector<std::int64_t> hist(std::size_t{1} << spec.K(), 0);
  for (std::uint64_t s = 0; s < spec.seed_count(); ++s) ++hist[zeta_bits(spec, seed_from_index(spec, s))];
  return hist;
}

}  // namespace

std::vector<std::int64_t> bias_spectrum(const BiasedSetSpec& spec) {
  check_exhaustive_guard(spec);
  auto w = pattern_histogram(spec);
  // Walsh-Hadamard transform: w[c] = sum_v hist[v] (-1)^{c.v}.
  for (std::size_t len = 1; len < w.size(); len <<= 1)
    for (std::size_t i = 0; i < w.size(); i += len << 1)
      for (std::size_t j = i; j < i + len; ++j) {
        const std::int64_t a = w[j], b = w[j + len];
        w[j] = a + b;
        w[j + len] = a - b;
      }
  return w;
}

Rational bias_bound_check(const BiasedSetSpec& spec) {
  const auto w = bias_spectrum(spec);
  std::int64_t worst = 0;
  for (std::size_t c = 1; c < w.size(); ++c) worst = std::max(worst, w[c] < 0 ? -w[c] : w[c]);
  return Rational(worst, static_cast<std::int64_t>(spec.seed_count()));
}

void write_bias_csv(std::ostream& out, const BiasedSetSpec& spec) {
  const auto w = bias_spectrum(spec);
  const double seeds = static_cast<double>(spec.seed_count());
  out << "pattern,bias\n";
  for (std::size_t c = 1; c < w.size(); ++c) {
    out << "0x" << std::hex << c << std::dec << ',' << std::setprecision(10)
        << static_cast<double>(w[c] < 0 ? -w[c] : w[c]) / seeds << '\n';
  }
}

Rational zero_mass(const BiasedSetSpec& spec, const std::vector<Elem>& c) {
  check_exhaustive_guard(spec);
  if (c.size() != spec.K()) throw DomainError("coefficient vector must have K entries");
  bool nonzero = false;
  for (const auto& e : c) nonzero |= !e.is_zero();
  if (!nonzero) throw DomainError("zero_mass is defined for nonzero c only");
  // sums[v] = sum of c_i over the set bits of v.
  std::vector<std::uint64_t> sums(std::size_t{1} << spec.K(), 0);
  for (std::size_t v = 1; v < sums.size(); ++v) {
    const unsigned low = static_cast<unsigned>(std::countr_zero(v));
    sums[v] = sums[v & (v - 1)] ^ c[low].bits();
  }
  const auto hist = pattern_histogram(spec);
  std::int64_t zeros = 0;
  for (std::size_t v = 0; v < hist.size(); ++v)
    if (sums[v] == 0) zeros += hist[v];
  return Rational(zeros, static_cast<std::int64_t>(spec.seed_count()));
}

AndTestParams::AndTestParams(const Field& field_, unsigned k_, std::size_t d_)
    : field(&field_), k(k_), d(d_), spec(quarter_bias_spec(k_)) {
  if (k < 1) throw ConfigError("the AND test needs k >= 1");
}

MultilinearFn zeta_extension(const Field& field, const BiasedSetSpec& spec, const Seed& seed) {
  const std::uint64_t bits = zeta_bits(spec, seed);
  std::vector<Elem> table;
  table.reserve(spec.K());
  for (std::uint64_t i = 0; i < spec.K(); ++i) table.push_back(field.elem(bits >> i & 1));
  return MultilinearFn(field, spec.k, std::move(table));
}

AndTranscript run_and_test_at(const AndTestParams& params, const Oracle& h, const AndProver& prover,
                              const Seed& seed, std::span<const Elem> q) {
  const Field& F = *params.field;
  AndTranscript out;
  out.seed = seed;
  const MultilinearFn Z = zeta_extension(F, params.spec, seed);
  Oracle H = [&](std::span<const Elem> pt) { return eval_ml(Z, pt) * h(pt); };
  const SumcheckParams sp{params.k, params.d + 1, F.zero()};
  out.sumcheck = run_summation_test_at(sp, F, H, prover(seed), q);
  return out;
}

AndTranscript run_and_test(const AndTestParams& params, const Oracle& h, const AndProver& prover, Rng& rng) {
  const Seed seed = sample_seed(params.spec, rng);
  std::vector<Elem> q;
  for (unsigned j = 0; j < params.k; ++j) q.push_back(params.field->sample(rng));
  return run_and_test_at(params, h, prover, seed, q);
}

namespace {

UnivariatePoly and_message(const Field& F, const MultilinearFn& Z, std::size_t d, const Oracle& h,
                           std::span<const Elem> prefix) {
  const std::size_t m = Z.arity();
  const std::size_t j = prefix.size();
  if (j >= m) throw DomainError("AND prover asked for round beyond k");
  MultilinearFn Zr = Z;
  for (const Elem& v : prefix) Zr = restrict(Zr, 0, v);
  const std::size_t free = m - j - 1;
  const std::size_t count = static_cast<std::size_t>(std::min<std::uint64_t>(d + 2, F.size()));
  std::vector<Elem> x(m, F.zero());
  std::copy(prefix.begin(), prefix.end(), x.begin());
  std::vector<std::pair<Elem, Elem>> points;
  for (const Elem& a : abscissae(F, count)) {
    x[j] = a;
    Elem acc = F.zero();
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << free); ++b) {
      const Elem& lo = Zr.table()[b << 1];
      const Elem& hi = Zr.table()[(b << 1) | 1];
      const Elem z = lo + a * (hi - lo);
      if (z.is_zero()) continue;
      for (std::size_t i = 0; i < free; ++i) x[j + 1 + i] = F.elem(b >> i & 1);
      acc += z * h(x);
    }
    points.emplace_back(a, acc);
  }
  return interpolate(points, d + 1);
}

}  // namespace

AndProver honest_and_prover(const AndTestParams& params, Oracle h) {
  return [params, h = std::move(h)](const Seed& seed) -> RoundHandler {
    auto Z = std::make_shared<MultilinearFn>(zeta_extension(*params.field, params.spec, seed));
    return [params, h, Z](std::span<const Elem> prefix) {
      return and_message(*params.field, *Z, params.d, h, prefix);
    };
  };
}

AndProver best_effort_and_prover(const AndTestParams& params, Oracle h) {
  return [params, h = std::move(h)](const Seed& seed) -> RoundHandler {
    const Field& F = *params.field;
    auto Z = std::make_shared<MultilinearFn>(zeta_extension(F, params.spec, seed));
    Elem sum = F.zero();
    std::vector<Elem> x(params.k, F.zero());
    for (std::uint64_t i = 0; i < params.spec.K(); ++i) {
      if (Z->table()[i].is_zero()) continue;
      for (unsigned b = 0; b < params.k; ++b) x[b] = F.elem(i >> b & 1);
      sum += h(x);
    }
    if (sum.is_zero()) {
      return [params, h, Z](std::span<const Elem> prefix) {
        return and_message(*params.field, *Z, params.d, h, prefix);
      };
    }
    Oracle H = [h, Z](std::span<const Elem> q) { return eval_ml(*Z, q) * h(q); };
    return lazy_cheater(F, params.k, params.d + 1, H, F.zero());
  };
}

}  // namespace mipsim
