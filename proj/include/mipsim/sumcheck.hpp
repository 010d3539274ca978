#pragma once

// The summation test: interactive verification that a low-degree polynomial
// sums to a claimed value over {0,1}^m, with one oracle read at a uniformly
// random point q drawn before the first round.

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mipsim/field.hpp"
#include "mipsim/poly.hpp"

namespace mipsim {

struct SumcheckParams {
  std::size_t m = 1;
  std::size_t d = 0;
  Elem claimed;
};

/// Oracle access to the summand on all of F^m.
using Oracle = std::function<Elem(std::span<const Elem>)>;

/// Prover side of one round. Receives the challenges q_1..q_{j-1} revealed so
/// far and returns the round-j univariate message.
using RoundHandler = std::function<UnivariatePoly(std::span<const Elem> challenges)>;

struct SumcheckRound {
  UnivariatePoly message;
  Elem claim;      // running claim the message is checked against
  Elem challenge;  // q_j, revealed after the message
};

enum class SumcheckVerdict { kAccept, kRejectDegree, kRejectMalformed, kRejectRoundCheck, kRejectFinal };

std::string verdict_name(SumcheckVerdict v);

struct SumcheckTranscript {
  std::vector<Elem> q;
  std::vector<SumcheckRound> rounds;
  std::optional<Elem> final_read;
  std::size_t oracle_reads = 0;
  SumcheckVerdict verdict = SumcheckVerdict::kRejectMalformed;

  bool accepted() const { return verdict == SumcheckVerdict::kAccept; }
};

/// Runs the verifier against `prover`. Degree violations and malformed
/// messages end the run with a rejection.
SumcheckTranscript run_summation_test(const SumcheckParams& params, const Field& field, const Oracle& h,
                                      const RoundHandler& prover, Rng& rng);

/// As above with q supplied by the caller (used for exhaustive checks).
SumcheckTranscript run_summation_test_at(const SumcheckParams& params, const Field& field, const Oracle& h,
                                         const RoundHandler& prover, std::span<const Elem> q);

/// Exact sum of h over {0,1}^m.
Elem cube_sum(const Field& field, std::size_t m, const Oracle& h);

/// Message g_j(X) = sum over boolean suffixes of h(q_1..q_{j-1}, X, suffix),
/// recovered from min(d+1, p) evaluations.
RoundHandler honest_prover(const Field& field, std::size_t m, std::size_t d, Oracle h);

/// Sends the honest message plus delta * X, where delta is the gap between
/// the running claim and the honest message's g(0) + g(1). Every
/// intermediate check passes. Stateful: use a fresh handler per run.
RoundHandler lazy_cheater(const Field& field, std::size_t m, std::size_t d, Oracle h, Elem false_claim);

/// One line per round: index, message coefficients, claim, challenge; then a
/// line with the final read and the verdict.
void write_transcript(std::ostream& out, const SumcheckTranscript& t);

}  // namespace mipsim
