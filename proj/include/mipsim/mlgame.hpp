#pragma once

// The r-player multilinearity game as a stand-alone referee, with exact and
// Monte-Carlo evaluation of classical (shared-randomness) strategies.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mipsim/poly.hpp"

namespace mipsim {

struct MLGameConfig {
  unsigned r = 3;
  std::size_t n = 1;
  const Field* field = nullptr;

  /// Throws ConfigError unless r >= 3, n >= 1 and |F| >= 4.
  MLGameConfig(unsigned r, std::size_t n, const Field& field);

  std::uint64_t points() const;  // |F|^n
};

/// A total function F^n -> F stored by point_index.
struct FunctionTable {
  const Field* field = nullptr;
  std::size_t n = 0;
  std::vector<std::uint64_t> values;

  Elem operator()(std::span<const Elem> x) const;
  Elem at(std::uint64_t index) const { return Elem(*field, values[index]); }
  friend bool operator==(const FunctionTable& a, const FunctionTable& b) {
    return a.field == b.field && a.n == b.n && a.values == b.values;
  }
};

FunctionTable table_of(const MultilinearFn& g);
FunctionTable table_of(const Field& field, std::size_t n, const std::function<Elem(std::span<const Elem>)>& f);
FunctionTable random_table(const Field& field, std::size_t n, Rng& rng);
/// Overwrites each point with probability `rate` (decided by a hash of
/// (seed, point)) by a pseudo-random value.
FunctionTable perturb(const FunctionTable& t, double rate, std::uint64_t seed);
/// True iff the table is the restriction of a multilinear polynomial.
bool is_multilinear(const FunctionTable& t);

/// One function per player, or a single function shared by all players.
struct DeterministicStrategy {
  std::vector<FunctionTable> players;

  const FunctionTable& player(unsigned j) const { return players.size() == 1 ? players[0] : players.at(j); }
};

/// A distribution over deterministic strategies (the shared randomness).
struct ClassicalStrategy {
  std::vector<double> weights;
  std::vector<DeterministicStrategy> components;

  static ClassicalStrategy pure(DeterministicStrategy s);
  static ClassicalStrategy shared(FunctionTable t);
  static ClassicalStrategy mixture(const std::vector<std::pair<double, ClassicalStrategy>>& parts);
};

/// Throws ConfigError if tables do not match the config or weights are not a
/// probability distribution.
void validate(const MLGameConfig& config, const ClassicalStrategy& s);

enum class MLBranch { kConsistency = 0, kLinearity = 1 };

struct PlayRecord {
  MLBranch branch = MLBranch::kConsistency;
  std::size_t component = 0;
  std::vector<unsigned> players;  // who received each question
  std::vector<std::vector<Elem>> questions;
  std::vector<Elem> answers;
  std::size_t axis = 0;  // linearity only
  bool accepted = false;

  nlohmann::json to_json() const;
};

/// One referee run. Consistency with probability 1/2: the same uniform x to
/// every player. Linearity otherwise: x, y, z differing only in a uniform
/// axis i with x_i, y_i, z_i distinct, sent to a uniform ordered triple of
/// distinct players (players 1, 2, 3 when r = 3).
PlayRecord play(const MLGameConfig& config, const ClassicalStrategy& s, Rng& rng);

struct MLValue {
  Rational consistency;
  Rational linearity;
  Rational total() const { return (consistency + linearity) / 2; }
};

/// Exact acceptance by enumerating the referee's coins. Requires
/// |F|^n * n * |F|^2 <= 10^7.
MLValue acceptance_exact(const MLGameConfig& config, const DeterministicStrategy& s);
/// Convex combination of the component values.
double acceptance_exact(const MLGameConfig& config, const ClassicalStrategy& s);

struct MLEstimate {
  std::uint64_t trials = 0;
  std::uint64_t accepts = 0;
  std::array<std::uint64_t, 2> branch_trials{};
  std::array<std::uint64_t, 2> branch_accepts{};
  double beta = 0.01;

  double rate() const;
  double halfwidth() const;
};

/// Trial t uses Rng(derive_seed(seed, 5, t)); results do not depend on the
/// worker count. The sink sees records in trial order.
MLEstimate estimate_game(const MLGameConfig& config, const ClassicalStrategy& s, std::uint64_t trials,
                         std::uint64_t seed, unsigned threads = 1, double beta = 0.01,
                         const std::function<void(std::uint64_t, const PlayRecord&)>& sink = {});

/// Question histogram per player (indexed by point_index) and chi-square
/// p-values against uniform.
struct QuestionAudit {
  std::vector<std::vector<std::uint64_t>> counts;
  std::vector<double> pvalue;
};
QuestionAudit audit_questions(const MLGameConfig& config, std::uint64_t trials, std::uint64_t seed);

/// Parses a strategy descriptor:
///   multilinear <v0,v1,...>            values on {0,1}^n, hex
///   perturbed <v0,v1,...> <rate> [seed]
///   mixture [ <w> <desc> ; <w> <desc> ... ]
///   players [ <desc> ; <desc> ... ]    one deterministic strategy per player
///   function-table <path>
/// A function-table file holds one line of |F|^n hex values per player (a
/// single line is shared by all players); `#` starts a comment.
ClassicalStrategy parse_strategy(const MLGameConfig& config, const std::string& descriptor,
                                 const std::string& base_dir = ".");
DeterministicStrategy read_function_tables(const MLGameConfig& config, std::istream& in);

}  // namespace mipsim
