#include "mipsim/sumcheck.hpp"

#include <memory>
#include <ostream>

namespace mipsim {

std::string verdict_name(SumcheckVerdict v) {
  switch (v) {
    case SumcheckVerdict::kAccept: return "accept";
    case SumcheckVerdict::kRejectDegree: return "reject_degree";
    case SumcheckVerdict::kRejectMalformed: return "reject_malformed";
    case SumcheckVerdict::kRejectRoundCheck: return "reject_round_check";
    case SumcheckVerdict::kRejectFinal: return "reject_final";
  }
  return "unknown";
}

SumcheckTranscript run_summation_test_at(const SumcheckParams& params, const Field& field, const Oracle& h,
                                         const RoundHandler& prover, std::span<const Elem> q) {
  if (params.m < 1) throw ConfigError("summation test needs m >= 1");
  if (q.size() != params.m) throw DomainError("challenge vector length differs from m");
  if (&params.claimed.field() != &field) throw ConfigError("claimed sum from a different field");

  SumcheckTranscript t;
  t.q.assign(q.begin(), q.end());
  Elem claim = params.claimed;
  for (std::size_t j = 0; j < params.m; ++j) {
    UnivariatePoly g = prover(std::span<const Elem>(t.q.data(), j));
    t.rounds.push_back({g, claim, t.q[j]});
    if (&g.field() != &field) {
      t.verdict = SumcheckVerdict::kRejectMalformed;
      return t;
    }
    if (g.degree() > static_cast<int>(params.d)) {
      t.verdict = SumcheckVerdict::kRejectDegree;
      return t;
    }
    if (g(field.zero()) + g(field.one()) != claim) {
      t.verdict = SumcheckVerdict::kRejectRoundCheck;
      return t;
    }
    claim = g(t.q[j]);
  }
  t.final_read = h(t.q);
  ++t.oracle_reads;
  if (&t.final_read->field() != &field) {
    t.verdict = SumcheckVerdict::kRejectMalformed;
    return t;
  }
  t.verdict = *t.final_read == claim ? SumcheckVerdict::kAccept : SumcheckVerdict::kRejectFinal;
  return t;
}

SumcheckTranscript run_summation_test(const SumcheckParams& params, const Field& field, const Oracle& h,
                                      const RoundHandler& prover, Rng& rng) {
  std::vector<Elem> q;
  q.reserve(params.m);
  for (std::size_t j = 0; j < params.m; ++j) q.push_back(field.sample(rng));
  return run_summation_test_at(params, field, h, prover, q);
}

Elem cube_sum(const Field& field, std::size_t m, const Oracle& h) {
  if (m >= 30) throw SizeGuardError("cube_sum over 2^" + std::to_string(m) + " points");
  Elem acc = field.zero();
  std::vector<Elem> x(m, field.zero());
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << m); ++b) {
    for (std::size_t i = 0; i < m; ++i) x[i] = field.elem(b >> i & 1);
    acc += h(x);
  }
  return acc;
}

namespace {

UnivariatePoly honest_message(const Field& field, std::size_t m, std::size_t d, const Oracle& h,
                              std::span<const Elem> prefix) {
  const std::size_t j = prefix.size();
  const std::size_t free = m - j - 1;
  const std::size_t count = static_cast<std::size_t>(std::min<std::uint64_t>(d + 1, field.size()));
  std::vector<Elem> x(m, field.zero());
  std::copy(prefix.begin(), prefix.end(), x.begin());
  std::vector<std::pair<Elem, Elem>> points;
  for (const Elem& a : abscissae(field, count)) {
    x[j] = a;
    Elem acc = field.zero();
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << free); ++b) {
      for (std::size_t i = 0; i < free; ++i) x[j + 1 + i] = field.elem(b >> i & 1);
      acc += h(x);
    }
    points.emplace_back(a, acc);
  }
  return interpolate(points, d);
}

}  // namespace

RoundHandler honest_prover(const Field& field, std::size_t m, std::size_t d, Oracle h) {
  return [&field, m, d, h = std::move(h)](std::span<const Elem> prefix) {
    if (prefix.size() >= m) throw DomainError("honest prover asked for round beyond m");
    return honest_message(field, m, d, h, prefix);
  };
}

RoundHandler lazy_cheater(const Field& field, std::size_t m, std::size_t d, Oracle h, Elem false_claim) {
  if (d < 1) throw ConfigError("the lazy cheater needs d >= 1 to shift by delta * X");
  struct State {
    std::vector<UnivariatePoly> sent;
  };
  auto state = std::make_shared<State>();
  return [&field, m, d, h = std::move(h), false_claim, state](std::span<const Elem> prefix) {
    const std::size_t j = prefix.size();
    if (j != state->sent.size()) throw DomainError("lazy cheater handler reused across runs");
    const Elem claim = j == 0 ? false_claim : state->sent.back()(prefix[j - 1]);
    UnivariatePoly g = honest_message(field, m, d, h, prefix);
    const Elem delta = claim - (g(field.zero()) + g(field.one()));
    g = g + UnivariatePoly(field, {field.zero(), delta});
    state->sent.push_back(g);
    return g;
  };
}

void write_transcript(std::ostream& out, const SumcheckTranscript& t) {
  for (std::size_t j = 0; j < t.rounds.size(); ++j) {
    const auto& r = t.rounds[j];
    out << "round " << j + 1 << " coeffs=[";
    const auto& c = r.message.coefficients();
    for (std::size_t i = 0; i < c.size(); ++i) out << (i ? "," : "") << c[i].hex();
    out << "] claim=" << r.claim.hex() << " challenge=" << r.challenge.hex() << '\n';
  }
  out << "final read=" << (t.final_read ? t.final_read->hex() : std::string("none"))
      << " reads=" << t.oracle_reads << " verdict=" << verdict_name(t.verdict) << '\n';
}

}  // namespace mipsim
