#pragma once

// The three-prover interactive proof with five uniformly chosen tests, and
// Monte-Carlo acceptance estimation for honest and adversarial provers.

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mipsim/instances.hpp"
#include "mipsim/smallbias.hpp"

namespace mipsim {

struct ProtocolConfig {
  ColoringInstance instance;
  const Field* field = nullptr;
  Elem alpha;
  unsigned repetitions = 1;
  std::uint64_t seed = 0;

  /// Uses alpha = t. Throws ConfigError if the field has fewer than 4 elements.
  ProtocolConfig(ColoringInstance instance, const Field& field, std::uint64_t seed = 0);

  std::size_t m() const { return instance.m(); }
  std::size_t d() const { return instance.d(); }
  const AndTestParams& and_params() const { return and_params_; }

  /// Whether p > max(8 q, n^(1/c0 + 4)) for a caller-supplied value q of the
  /// unspecified polynomial q(m, d) and constant c0.
  bool field_size_rule(double q_value, double c0) const;

 private:
  AndTestParams and_params_;
};

enum class TestKind { kConsistency = 1, kLinearity = 2, kAndP3 = 3, kAndP1 = 4, kAndP2 = 5 };

std::string test_name(TestKind t);

/// A prover. Lookup answers and AND-test messages may depend only on the
/// prover's own questions and the per-run shared randomness.
class ProverStrategy {
 public:
  virtual ~ProverStrategy() = default;
  virtual std::string name() const = 0;
  /// Called once at the start of every protocol run; the seed is common to
  /// all three provers.
  virtual void begin_run(std::uint64_t shared_seed) { (void)shared_seed; }
  /// Lookup role. An empty optional or an element of a foreign field is a
  /// malformed answer.
  virtual std::optional<Elem> lookup(std::span<const Elem> x) = 0;
  /// AND-test role: the round handler for the revealed seed.
  virtual RoundHandler and_test(const AndTestParams& params, const Seed& seed) = 0;
};

using StrategyTriple = std::array<std::unique_ptr<ProverStrategy>, 3>;
/// Builds a fresh set of three strategies; called once per worker.
using StrategyFactory = std::function<StrategyTriple()>;

struct RunRecord {
  TestKind test = TestKind::kConsistency;
  /// Lookup questions and answers per prover (index 0 is P1).
  std::array<std::vector<std::vector<Elem>>, 3> questions;
  std::array<std::vector<std::optional<Elem>>, 3> answers;
  std::optional<AndTranscript> and_transcript;
  int and_prover = -1;  // 0-based index of the AND-test prover
  std::size_t oracle_reads = 0;
  bool accepted = false;
  std::string reason;

  nlohmann::json to_json() const;
};

/// One run with the verifier's coins from `rng` and the provers' shared
/// randomness from `shared_seed`.
RunRecord run_protocol(const ProtocolConfig& config, const StrategyTriple& provers, Rng& rng,
                       std::uint64_t shared_seed);
/// Same with the test fixed by the caller.
RunRecord run_protocol_test(const ProtocolConfig& config, const StrategyTriple& provers, TestKind test, Rng& rng,
                            std::uint64_t shared_seed);

/// Slope equality (b-a)/(y-x) = (c-b)/(z-y) = (c-a)/(z-x) for distinct x, y, z.
bool collinear(const Elem& x, const Elem& y, const Elem& z, const Elem& a, const Elem& b, const Elem& c);

// ---------------------------------------------------------------------------
// Strategies

/// Lookups answer the multilinear extension of the witness; the AND-test role
/// runs the honest prover. Throws ConfigError if the witness is invalid.
std::unique_ptr<ProverStrategy> honest_strategy(const ProtocolConfig& config, const Assignment& witness);
/// Every lookup answers c; AND-test messages are zero polynomials.
std::unique_ptr<ProverStrategy> constant_answerer(const Elem& c);
/// All three provers answer with the same pseudo-random function of
/// (shared seed, question).
std::unique_ptr<ProverStrategy> shared_random_table(const ProtocolConfig& config);
/// The witness extension with a delta-fraction of points (chosen from shared
/// randomness) overwritten by shared random values. The AND-test role is
/// honest for the unperturbed extension.
std::unique_ptr<ProverStrategy> perturbed_multilinear(const ProtocolConfig& config, const Assignment& witness,
                                                      double delta);
/// Plays the extension of `assignment` (typically a best improper coloring)
/// and, in the AND-test role, is honest when the weighted sum vanishes and
/// the lazy cheater otherwise.
std::unique_ptr<ProverStrategy> honest_on_no_instance(const ProtocolConfig& config, const Assignment& assignment);

/// Factory for named strategies: honest, constant, shared-random,
/// perturbed, no-instance. `witness` is needed by honest, perturbed and
/// no-instance; `param` is the constant (as field bits) or the rate.
StrategyFactory make_uniform_factory(const ProtocolConfig& config, const std::string& name,
                                     const Assignment& witness, double param = 0);

// ---------------------------------------------------------------------------
// Estimation

struct Estimate {
  std::uint64_t trials = 0;
  std::uint64_t accepts = 0;
  std::array<std::uint64_t, 5> branch_trials{};
  std::array<std::uint64_t, 5> branch_accepts{};
  double beta = 0.01;

  double rate() const;
  double halfwidth() const;
  double lower() const;
  double upper() const;
};

/// Runs `trials` independent trials, each seeded from (master seed, trial
/// index), across `threads` workers. Counts do not depend on the worker
/// count. `repetitions` > 1 makes each trial a sequential repetition that
/// accepts iff all runs accept; its branch is that of the first run.
Estimate estimate_acceptance(const ProtocolConfig& config, const StrategyFactory& factory, std::uint64_t trials,
                             unsigned threads = 1, double beta = 0.01,
                             const std::function<void(std::uint64_t, const RunRecord&)>& sink = {});

/// `config.repetitions` independent runs; accepts iff all accept.
bool sequential_repeat(const ProtocolConfig& config, const StrategyTriple& provers, Rng& rng,
                       std::uint64_t shared_seed_base);

struct MarginalAudit {
  std::array<std::vector<std::uint64_t>, 3> counts;  // per prover, indexed by point_index
  std::array<double, 3> pvalue{};
};

/// Histogram of lookup questions per prover over `trials` runs, restricted
/// to `only` if given, with chi-square p-values against uniform.
MarginalAudit marginal_audit(const ProtocolConfig& config, const StrategyFactory& factory, std::uint64_t trials,
                             std::optional<TestKind> only = std::nullopt);

}  // namespace mipsim
