// mipsim: batch experiments for the three-prover protocol, the
// multilinearity game and its quantum strategies.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>

#include "mipsim/errors.hpp"
#include "mipsim/instances.hpp"
#include "mipsim/mlgame.hpp"
#include "mipsim/protocol.hpp"
#include "mipsim/quantum/lemmas.hpp"
#include "mipsim/smallbias.hpp"
#include "mipsim/stats.hpp"

namespace fs = std::filesystem;
using namespace mipsim;

namespace {

enum Exit { kRan = 0, kUsage = 1, kInvariant = 2 };

// Field specs: `2^k` (tower modulus for k in {2, 6, 18}, smallest
// irreducible otherwise) or `k:0xMODULUS`.
const Field& parse_field(const std::string& spec) {
  std::smatch m;
  if (std::regex_match(spec, m, std::regex(R"((?:GF\()?2\^(\d+)\)?)"))) {
    const unsigned k = static_cast<unsigned>(std::stoul(m[1]));
    if (k == 2) return Field::tower(0);
    if (k == 6) return Field::tower(1);
    if (k == 18) return Field::tower(2);
    return Field::smallest_irreducible(k);
  }
  if (std::regex_match(spec, m, std::regex(R"((\d+):(0x[0-9a-fA-F]+|[0-9a-fA-F]+))"))) {
    return Field::custom(static_cast<unsigned>(std::stoul(m[1])), std::stoull(m[2], nullptr, 16));
  }
  throw ConfigError("unrecognized field spec '" + spec + "' (use 2^k or k:0xMODULUS)");
}

SuccinctGraph load_graph(const std::string& source) {
  if (source == "triangle") return SuccinctGraph::triangle();
  if (source == "k4") return SuccinctGraph::k4();
  if (source == "c4") return SuccinctGraph::four_cycle();
  return read_graph_file(source);
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(6) << v;
  return os.str();
}

// Output files go under --out; without it nothing is written to disk.
struct Outputs {
  std::string dir;

  std::optional<std::ofstream> open(const std::string& name) const {
    if (dir.empty()) return std::nullopt;
    fs::create_directories(dir);
    std::ofstream f(fs::path(dir) / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (fs::path(dir) / name).string());
    return f;
  }
};

void summary_header(std::ostream& out, const std::string& anchor, const std::string& columns) {
  out << "# " << anchor << '\n' << columns << '\n';
}

// ---------------------------------------------------------------------------

struct InstanceArgs {
  std::string graph = "triangle";
  std::string out;
};

int run_gen_instance(const InstanceArgs& a) {
  const SuccinctGraph g = load_graph(a.graph);
  const ColoringInstance inst = arithmetize(g);
  if (!a.out.empty()) {
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + a.out);
    write_instance(f, inst);
  }
  std::cout << "instance n=" << inst.n << " r=" << inst.r << " m=" << inst.m() << " d=" << inst.d()
            << " edges=" << g.edges().size() << " colorable=" << (is_3colorable(g) ? "yes" : "no") << '\n';
  return kRan;
}

struct ProtocolArgs {
  std::string graph = "triangle";
  std::string field = "2^6";
  std::string strategy = "honest";
  double param = 0;
  std::uint64_t seed = 0;
  std::uint64_t trials = 1;
  unsigned repetitions = 1;
  unsigned threads = 1;
  bool records = false;
  Outputs out;
};

int run_protocol_experiment(const ProtocolArgs& a, bool always_records) {
  const SuccinctGraph g = load_graph(a.graph);
  ProtocolConfig config(arithmetize(g), parse_field(a.field), a.seed);
  config.repetitions = a.repetitions;
  Coloring coloring;
  if (auto c = is_3colorable(g)) {
    coloring = *c;
  } else {
    if (a.strategy == "honest" || a.strategy == "perturbed") {
      throw ConfigError("graph has no 3-coloring; strategy '" + a.strategy + "' needs a witness");
    }
    coloring = best_improper_coloring(g).first;
  }
  const Assignment witness = coloring_to_assignment(*config.field, coloring);
  const StrategyFactory factory = make_uniform_factory(config, a.strategy, witness, a.param);

  auto records = (always_records || a.records) ? a.out.open("records.jsonl") : std::nullopt;
  std::function<void(std::uint64_t, const RunRecord&)> sink;
  if (records) {
    sink = [&](std::uint64_t t, const RunRecord& r) {
      nlohmann::json j = r.to_json();
      j["trial"] = t;
      *records << j.dump() << '\n';
    };
  }
  const Estimate est = estimate_acceptance(config, factory, a.trials, a.threads, 0.01, sink);
  if (est.accepts > est.trials) throw InvariantViolation("more accepts than trials");

  if (auto csv = a.out.open("summary.csv")) {
    summary_header(*csv, "five tests of the three-prover protocol, field " + config.field->name(),
                   "strategy,branch,accepts,trials,rate,ci_low,ci_high");
    const auto row = [&](const std::string& branch, std::uint64_t acc, std::uint64_t n) {
      const double rate = n ? static_cast<double>(acc) / static_cast<double>(n) : 0.0;
      const double hw = n ? hoeffding_halfwidth(n, est.beta) : 1.0;
      *csv << a.strategy << ',' << branch << ',' << acc << ',' << n << ',' << fixed(rate, 6) << ','
           << fixed(std::max(0.0, rate - hw), 6) << ',' << fixed(std::min(1.0, rate + hw), 6) << '\n';
    };
    for (int b = 0; b < 5; ++b)
      row(test_name(static_cast<TestKind>(b + 1)), est.branch_accepts[b], est.branch_trials[b]);
    row("all", est.accepts, est.trials);
  }
  std::cout << "strategy=" << a.strategy << " trials=" << est.trials << " accepts=" << est.accepts
            << " accept_rate=" << fixed(est.rate(), 3) << " ci=[" << fixed(est.lower(), 4) << ','
            << fixed(est.upper(), 4) << "]\n";
  return kRan;
}

struct MLGameArgs {
  std::string field = "2^2";
  std::size_t n = 1;
  unsigned r = 3;
  std::string strategy;
  std::uint64_t seed = 0;
  std::uint64_t trials = 1000;
  unsigned threads = 1;
  bool records = false;
  Outputs out;
};

int run_mlgame(const MLGameArgs& a) {
  const MLGameConfig config(a.r, a.n, parse_field(a.field));
  const ClassicalStrategy s = parse_strategy(config, a.strategy);
  auto records = a.records ? a.out.open("records.jsonl") : std::nullopt;
  std::function<void(std::uint64_t, const PlayRecord&)> sink;
  if (records) {
    sink = [&](std::uint64_t t, const PlayRecord& r) {
      nlohmann::json j = r.to_json();
      j["trial"] = t;
      *records << j.dump() << '\n';
    };
  }
  const MLEstimate est = estimate_game(config, s, a.trials, a.seed, a.threads, 0.01, sink);
  std::optional<double> exact;
  try {
    exact = acceptance_exact(config, s);
  } catch (const SizeGuardError&) {
  }
  if (auto csv = a.out.open("summary.csv")) {
    summary_header(*csv, "multilinearity game, r=" + std::to_string(a.r) + " n=" + std::to_string(a.n) + ", " +
                             config.field->name(),
                   "strategy,branch,accepts,trials,rate,ci_low,ci_high");
    const char* names[] = {"consistency", "linearity"};
    const auto row = [&](const std::string& branch, std::uint64_t acc, std::uint64_t n) {
      const double rate = n ? static_cast<double>(acc) / static_cast<double>(n) : 0.0;
      const double hw = n ? hoeffding_halfwidth(n, est.beta) : 1.0;
      *csv << '"' << a.strategy << "\"," << branch << ',' << acc << ',' << n << ',' << fixed(rate, 6) << ','
           << fixed(std::max(0.0, rate - hw), 6) << ',' << fixed(std::min(1.0, rate + hw), 6) << '\n';
    };
    for (int b = 0; b < 2; ++b) row(names[b], est.branch_accepts[b], est.branch_trials[b]);
    row("all", est.accepts, est.trials);
    if (exact) *csv << "# exact_value," << fixed(*exact, 12) << '\n';
  }
  std::cout << "trials=" << est.trials << " accepts=" << est.accepts << " accept_rate=" << fixed(est.rate(), 3);
  if (exact) std::cout << " exact=" << fixed(*exact, 6);
  std::cout << '\n';
  return kRan;
}

struct QuantumArgs {
  std::string strategy_file;
  std::string classical;
  std::string field = "2^2";
  std::size_t n = 1;
  unsigned r = 3;
  double rotate = 0;
  std::optional<std::uint64_t> seed;
  bool symmetrize = false;
  std::string save;
  Outputs out;
};

int run_quantum_eval(const QuantumArgs& a) {
  using namespace mipsim::quantum;
  QuantumStrategy s;
  if (!a.strategy_file.empty()) {
    std::ifstream f(a.strategy_file);
    if (!f) throw ConfigError("cannot read " + a.strategy_file);
    s = read_strategy(f);
  } else if (!a.classical.empty()) {
    const MLGameConfig config(a.r, a.n, parse_field(a.field));
    s = classical_embedding(config, parse_strategy(config, a.classical));
  } else {
    throw ConfigError("quantum-eval needs --strategy-file or --classical");
  }
  if (a.rotate != 0) s = rotate_measurements(s, a.rotate, *a.seed);
  if (a.symmetrize) s = symmetrize(s);
  const MLGameConfig config(s.r, s.n, *s.field);
  validate(s, 1e-8);
  const double value = game_value_quantum(config, s);
  if (value < -kInequalityTol || value > 1 + kInequalityTol) throw InvariantViolation("game value outside [0, 1]");

  std::vector<std::pair<std::string, double>> rows{{"value", value}};
  if (s.projective) {
    for (std::size_t axis = 0; axis < s.n; ++axis) {
      const auto lines = lines_measurement(s, axis);
      if (lines.completeness_error > 1e-8) throw InvariantViolation("lines measurement does not sum to identity");
      rows.emplace_back("lines_defect_axis" + std::to_string(axis), lines.defect);
      rows.emplace_back("lines_completeness_error_axis" + std::to_string(axis), lines.completeness_error);
    }
  }
  if (!a.save.empty()) {
    std::ofstream f(a.save, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + a.save);
    write_strategy(f, s);
  }
  if (auto csv = a.out.open("summary.csv")) {
    summary_header(*csv, "quantum strategies for the multilinearity game, " + s.field->name(), "quantity,value");
    for (const auto& [k, v] : rows) *csv << k << ',' << sci(v) << '\n';
  }
  std::cout << "d=" << s.d << " r=" << s.r << " value=" << fixed(value, 6);
  if (rows.size() > 1) std::cout << " lines_defect=" << sci(rows[1].second);
  std::cout << '\n';
  return kRan;
}

struct LemmaArgs {
  std::size_t instances = 1000;
  std::size_t toy = 50;
  std::uint64_t seed = 0;
  Outputs out;
};

int run_check_lemmas(const LemmaArgs& a) {
  using namespace mipsim::quantum;
  auto reports = lemma_checks(a.instances, a.seed);

  // Toy-instance checks: the feasible point's objective against
  // 2 inc(A, R) + 8 sqrt(inc(A, A)), and sum_g V^g <= I after pasting.
  LemmaReport feas{"self_improvement_feasible", a.toy, -1e300, 0, true};
  std::vector<LemmaReport> paste{{"pasting_eta_0.2", a.toy, -1e300, 0, true},
                                 {"pasting_eta_0.1", a.toy, -1e300, 0, true}};
  const double etas[] = {0.2, 0.1};
  for (std::size_t i = 0; i < a.toy; ++i) {
    const std::uint64_t s = derive_seed(a.seed, 30, i);
    const ToyInstance inst = random_toy_instance(s);
    const Conv1Report rep = self_improvement_feasible(inst.A, inst.R, inst.rho1);
    const double bound =
        2 * inc(inst.A, inst.R, inst.rho2) + 8 * std::sqrt(std::max(0.0, inc(inst.A, inst.A, inst.rho2)));
    const double v = std::max(rep.objective - bound - 1e-6, rep.max_violation - 1e-8);
    if (v > feas.max_violation) feas.max_violation = v, feas.worst_seed = s;
    const SubMeasurementFamily& t = inst.R.arity < inst.R.n ? inst.R : inst.A;
    for (int e = 0; e < 2; ++e) {
      const double pv = pasting(t, etas[e]).max_eigenvalue - 1 - 1e-10;
      if (pv > paste[e].max_violation) paste[e].max_violation = pv, paste[e].worst_seed = s;
    }
  }
  feas.passed = feas.max_violation <= 0;
  for (auto& p : paste) p.passed = p.max_violation <= 0;
  if (a.toy > 0) {
    reports.push_back(feas);
    reports.insert(reports.end(), paste.begin(), paste.end());
  }

  if (auto csv = a.out.open("summary.csv")) {
    *csv << "# matrix inequalities of the soundness analysis\n";
    write_lemma_csv(*csv, reports);
  }
  std::size_t failed = 0;
  for (const auto& r : reports) failed += !r.passed;
  std::cout << "checks=" << reports.size() << " failed=" << failed << " instances=" << a.instances << '\n';
  return failed ? kInvariant : kRan;
}

struct BiasArgs {
  unsigned k = 3;
  unsigned mprime = 6;
  Outputs out;
};

int run_bias_audit(const BiasArgs& a) {
  const BiasedSetSpec spec(a.k, a.mprime);
  const Rational max_bias = bias_bound_check(spec);
  const Rational bound = spec.bias_bound();
  if (auto csv = a.out.open("bias.csv")) {
    *csv << "# powering small-bias set, K=" << spec.K() << " mprime=" << a.mprime << '\n';
    write_bias_csv(*csv, spec);
  }
  std::cout << "K=" << spec.K() << " mprime=" << a.mprime << " max_bias=" << max_bias << " ("
            << fixed(boost::rational_cast<double>(max_bias), 6) << ") bound=" << bound << " within="
            << (max_bias <= bound ? "yes" : "no") << '\n';
  return max_bias <= bound ? kRan : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mipsim: three-prover protocol and multilinearity game experiments"};
  app.require_subcommand(1);
  app.set_config("--descriptor", "", "Experiment descriptor (TOML or INI) supplying any of the options");

  const std::vector<std::string> strategies{"honest", "constant", "shared-random", "perturbed", "no-instance"};

  InstanceArgs inst;
  auto* gen = app.add_subcommand("gen-instance", "Arithmetize a graph and write the (r, n, f) instance");
  gen->add_option("--graph", inst.graph, "Graph file or one of triangle, k4, c4");
  gen->add_option("-o,--out", inst.out, "Instance file to write");

  ProtocolArgs prove_args, est_args;
  est_args.trials = 10000;
  const auto protocol_options = [&](CLI::App* sub, ProtocolArgs& a) {
    sub->add_option("--graph", a.graph, "Graph file or one of triangle, k4, c4");
    sub->add_option("--field", a.field, "Field: 2^k or k:0xMODULUS");
    sub->add_option("--strategy", a.strategy, "Prover strategy")->check(CLI::IsMember(strategies));
    sub->add_option("--param", a.param, "Constant (field bits) or perturbation rate");
    sub->add_option("--seed", a.seed, "Master seed")->required();
    sub->add_option("--trials", a.trials, "Number of runs")->check(CLI::PositiveNumber);
    sub->add_option("--repetitions", a.repetitions, "Sequential repetitions per trial")->check(CLI::PositiveNumber);
    sub->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("-o,--out", a.out.dir, "Output directory");
  };
  auto* prove = app.add_subcommand("prove", "Run the protocol and log full run records");
  protocol_options(prove, prove_args);
  auto* estimate = app.add_subcommand("estimate", "Estimate acceptance with per-branch confidence intervals");
  protocol_options(estimate, est_args);
  estimate->add_flag("--records", est_args.records, "Also write run records");

  MLGameArgs ml;
  auto* mlgame = app.add_subcommand("mlgame", "Play the multilinearity game with a classical strategy");
  mlgame->add_option("--field", ml.field, "Field: 2^k or k:0xMODULUS");
  mlgame->add_option("--n", ml.n, "Number of variables")->check(CLI::PositiveNumber);
  mlgame->add_option("--r", ml.r, "Number of players");
  mlgame->add_option("--strategy", ml.strategy, "Strategy descriptor")->required();
  mlgame->add_option("--seed", ml.seed, "Master seed")->required();
  mlgame->add_option("--trials", ml.trials, "Number of plays")->check(CLI::PositiveNumber);
  mlgame->add_option("--threads", ml.threads, "Worker threads")->check(CLI::PositiveNumber);
  mlgame->add_flag("--records", ml.records, "Also write play records");
  mlgame->add_option("-o,--out", ml.out.dir, "Output directory");

  QuantumArgs q;
  auto* qeval = app.add_subcommand("quantum-eval", "Exact value and lines defect of a quantum strategy");
  auto* qfile = qeval->add_option("--strategy-file", q.strategy_file, "Strategy file");
  auto* qclassical = qeval->add_option("--classical", q.classical, "Classical strategy descriptor to embed");
  qfile->excludes(qclassical);
  qeval->add_option("--field", q.field, "Field for --classical: 2^k or k:0xMODULUS");
  qeval->add_option("--n", q.n, "Variables for --classical")->check(CLI::PositiveNumber);
  qeval->add_option("--r", q.r, "Players for --classical");
  auto* rotate = qeval->add_option("--rotate", q.rotate, "Rotate every measurement by this angle");
  auto* qseed = qeval->add_option("--seed", q.seed, "Seed for --rotate");
  rotate->needs(qseed);
  qeval->add_flag("--symmetrize", q.symmetrize, "Symmetrize over player permutations first");
  qeval->add_option("--save", q.save, "Write the evaluated strategy to this file");
  qeval->add_option("-o,--out", q.out.dir, "Output directory");

  LemmaArgs lem;
  auto* lemmas = app.add_subcommand("check-lemmas", "Randomized checks of the matrix inequalities");
  lemmas->add_option("--instances", lem.instances, "Instances per inequality");
  lemmas->add_option("--toy", lem.toy, "Toy instances for the self-improvement and pasting checks");
  lemmas->add_option("--seed", lem.seed, "Master seed")->required();
  lemmas->add_option("-o,--out", lem.out.dir, "Output directory");

  BiasArgs bias;
  auto* audit = app.add_subcommand("bias-audit", "Exhaustive bias of the powering small-bias set");
  audit->add_option("--k", bias.k, "K = 2^k indices")->check(CLI::Range(1, 4));
  audit->add_option("--mprime", bias.mprime, "Seed field degree")->check(CLI::Range(1, 8));
  audit->add_option("-o,--out", bias.out.dir, "Output directory");

  // A descriptor names its command in its first [section] header.
  std::vector<std::string> args(argv, argv + argc);
  const std::vector<std::string> commands{"gen-instance", "prove",        "estimate",  "mlgame",
                                          "quantum-eval", "check-lemmas", "bias-audit"};
  bool has_command = false;
  for (const auto& a : args) has_command |= std::find(commands.begin(), commands.end(), a) != commands.end();
  for (std::size_t i = 1; i + 1 < args.size() && !has_command; ++i) {
    if (args[i] != "--descriptor") continue;
    std::ifstream f(args[i + 1]);
    std::string line;
    std::smatch m;
    while (std::getline(f, line)) {
      if (std::regex_match(line, m, std::regex(R"(\s*\[([A-Za-z-]+)\]\s*)"))) {
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(i + 2), m[1]);
        break;
      }
    }
    break;
  }
  std::vector<char*> cargs;
  for (auto& a : args) cargs.push_back(a.data());

  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kRan : kUsage;
  }

  try {
    if (*gen) return run_gen_instance(inst);
    if (*prove) return run_protocol_experiment(prove_args, true);
    if (*estimate) return run_protocol_experiment(est_args, false);
    if (*mlgame) return run_mlgame(ml);
    if (*qeval) return run_quantum_eval(q);
    if (*lemmas) return run_check_lemmas(lem);
    if (*audit) return run_bias_audit(bias);
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help() << '\n';
    return kUsage;
  }
  return kUsage;
}
