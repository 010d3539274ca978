#include "mipsim/protocol.hpp"

#include <atomic>
#include <mutex>
#include <cmath>
#include <thread>

#include "mipsim/stats.hpp"

namespace mipsim {

ProtocolConfig::ProtocolConfig(ColoringInstance inst, const Field& f, std::uint64_t s)
    : instance(std::move(inst)), field(&f), seed(s), and_params_(f, 1, 0) {
  if (f.size() < 4) throw ConfigError("the protocol needs |F| >= 4, got " + f.name());
  alpha = f.alpha();
  and_params_ = AndTestParams(f, static_cast<unsigned>(instance.m()), instance.d());
}

bool ProtocolConfig::field_size_rule(double q_value, double c0) const {
  if (c0 <= 0) throw ConfigError("c0 must be positive");
  const double p = static_cast<double>(field->size());
  return p > 8 * q_value && p > std::pow(static_cast<double>(instance.n), 1 / c0 + 4);
}

std::string test_name(TestKind t) {
  switch (t) {
    case TestKind::kConsistency: return "consistency";
    case TestKind::kLinearity: return "linearity";
    case TestKind::kAndP3: return "and_p3";
    case TestKind::kAndP1: return "and_p1";
    case TestKind::kAndP2: return "and_p2";
  }
  return "unknown";
}

bool collinear(const Elem& x, const Elem& y, const Elem& z, const Elem& a, const Elem& b, const Elem& c) {
  const Elem s1 = (b - a) / (y - x);
  const Elem s2 = (c - b) / (z - y);
  const Elem s3 = (c - a) / (z - x);
  return s1 == s2 && s2 == s3;
}

namespace {

nlohmann::json elems_json(std::span<const Elem> v) {
  auto out = nlohmann::json::array();
  for (const auto& e : v) out.push_back(e.hex());
  return out;
}

}  // namespace

nlohmann::json RunRecord::to_json() const {
  nlohmann::json j;
  j["test"] = static_cast<int>(test);
  j["test_name"] = test_name(test);
  j["questions"] = nlohmann::json::array();
  j["answers"] = nlohmann::json::array();
  for (int p = 0; p < 3; ++p) {
    auto qs = nlohmann::json::array();
    for (const auto& q : questions[p]) qs.push_back(elems_json(q));
    j["questions"].push_back(qs);
    auto as = nlohmann::json::array();
    for (const auto& a : answers[p]) as.push_back(a ? nlohmann::json(a->hex()) : nlohmann::json(nullptr));
    j["answers"].push_back(as);
  }
  if (and_transcript) {
    nlohmann::json t;
    t["prover"] = and_prover + 1;
    t["seed"] = {and_transcript->seed.x.hex(), and_transcript->seed.y.hex()};
    const auto& sc = and_transcript->sumcheck;
    t["q"] = elems_json(sc.q);
    t["rounds"] = nlohmann::json::array();
    for (const auto& r : sc.rounds) {
      t["rounds"].push_back({{"coeffs", elems_json(r.message.coefficients())},
                             {"claim", r.claim.hex()},
                             {"challenge", r.challenge.hex()}});
    }
    t["final_read"] = sc.final_read ? nlohmann::json(sc.final_read->hex()) : nlohmann::json(nullptr);
    t["verdict"] = verdict_name(sc.verdict);
    j["and_test"] = t;
  }
  j["oracle_reads"] = oracle_reads;
  j["accepted"] = accepted;
  j["reason"] = reason;
  return j;
}

namespace {

std::vector<Elem> sample_point(const Field& F, std::size_t n, Rng& rng) {
  std::vector<Elem> x;
  x.reserve(n);
  for (std::size_t i = 0; i < n; ++i) x.push_back(F.sample(rng));
  return x;
}

// Sends x to prover p; returns the answer if well formed.
std::optional<Elem> ask(RunRecord& rec, const StrategyTriple& provers, int p, const Field& F,
                        std::vector<Elem> x) {
  std::optional<Elem> a = provers[p]->lookup(x);
  if (a && (!a->has_field() || &a->field() != &F)) a.reset();
  rec.questions[p].push_back(std::move(x));
  rec.answers[p].push_back(a);
  return a;
}

void reject(RunRecord& rec, std::string reason) {
  rec.accepted = false;
  rec.reason = std::move(reason);
}

}  // namespace

RunRecord run_protocol_test(const ProtocolConfig& config, const StrategyTriple& provers, TestKind test, Rng& rng,
                            std::uint64_t shared_seed) {
  const Field& F = *config.field;
  const std::size_t n = config.instance.n;
  for (const auto& p : provers) p->begin_run(shared_seed);

  RunRecord rec;
  rec.test = test;
  rec.accepted = true;
  switch (test) {
    case TestKind::kConsistency: {
      const auto x = sample_point(F, n, rng);
      std::array<std::optional<Elem>, 3> a;
      for (int p = 0; p < 3; ++p) a[p] = ask(rec, provers, p, F, x);
      if (!a[0] || !a[1] || !a[2]) {
        reject(rec, "malformed_answer");
      } else if (!(*a[0] == *a[1] && *a[1] == *a[2])) {
        reject(rec, "inconsistent_answers");
      }
      break;
    }
    case TestKind::kLinearity: {
      if (n == 0) throw ConfigError("the linearity test needs n >= 1");
      const std::size_t i = uniform_below(rng, n);
      auto x = sample_point(F, n, rng);
      const Elem yi = F.sample_except(rng, x[i]);
      Elem zi = F.sample_except(rng, x[i]);
      while (zi == yi) zi = F.sample_except(rng, x[i]);
      auto y = x, z = x;
      y[i] = yi;
      z[i] = zi;
      const auto a = ask(rec, provers, 0, F, x);
      const auto b = ask(rec, provers, 1, F, y);
      const auto c = ask(rec, provers, 2, F, z);
      if (!a || !b || !c) {
        reject(rec, "malformed_answer");
      } else if (!collinear(x[i], yi, zi, *a, *b, *c)) {
        reject(rec, "not_collinear");
      }
      break;
    }
    case TestKind::kAndP3:
    case TestKind::kAndP1:
    case TestKind::kAndP2: {
      // (AND-test prover, lookup for b1, lookup for b2)
      int prover = 2, l1 = 0, l2 = 1;
      if (test == TestKind::kAndP1) prover = 0, l1 = 2, l2 = 1;
      if (test == TestKind::kAndP2) prover = 1, l1 = 0, l2 = 2;
      rec.and_prover = prover;
      const ColoringInstance& inst = config.instance;
      const ExprProgram prog(inst.f);
      bool malformed = false;
      Oracle h = [&](std::span<const Elem> q) {
        ++rec.oracle_reads;
        std::vector<Elem> b1(q.begin() + inst.r, q.begin() + inst.r + n);
        std::vector<Elem> b2(q.begin() + inst.r + n, q.end());
        const auto a1 = ask(rec, provers, l1, F, b1);
        const auto a2 = ask(rec, provers, l2, F, b2);
        if (!a1 || !a2) {
          malformed = true;
          return F.zero();
        }
        std::vector<Elem> pt;
        pt.reserve(inst.arity());
        pt.push_back(config.alpha);
        pt.insert(pt.end(), q.begin(), q.end());
        pt.push_back(*a1);
        pt.push_back(*a2);
        return prog(F, pt);
      };
      AndProver and_prover = [&](const Seed& seed) { return provers[prover]->and_test(config.and_params(), seed); };
      rec.and_transcript = run_and_test(config.and_params(), h, and_prover, rng);
      if (malformed) {
        reject(rec, "malformed_answer");
      } else if (!rec.and_transcript->accepted()) {
        reject(rec, "and_test_" + verdict_name(rec.and_transcript->sumcheck.verdict));
      }
      break;
    }
  }
  if (rec.accepted) rec.reason = "ok";
  return rec;
}

RunRecord run_protocol(const ProtocolConfig& config, const StrategyTriple& provers, Rng& rng,
                       std::uint64_t shared_seed) {
  const auto test = static_cast<TestKind>(1 + uniform_below(rng, 5));
  return run_protocol_test(config, provers, test, rng, shared_seed);
}

// ---------------------------------------------------------------------------
// Strategies

namespace {

// h(z, b1, b2) = f(alpha, z, b1, b2, g(b1), g(b2)) for a fixed lookup function g.
Oracle lookup_summand(const ProtocolConfig& config, std::function<Elem(std::span<const Elem>)> g) {
  auto prog = std::make_shared<ExprProgram>(config.instance.f);
  const Field* F = config.field;
  const Elem alpha = config.alpha;
  const std::size_t r = config.instance.r, n = config.instance.n;
  return [prog, F, alpha, r, n, g = std::move(g)](std::span<const Elem> q) {
    std::uint64_t bits[64];
    bits[0] = alpha.bits();
    for (std::size_t i = 0; i < q.size(); ++i) bits[1 + i] = q[i].bits();
    bits[1 + q.size()] = g(q.subspan(r, n)).bits();
    bits[2 + q.size()] = g(q.subspan(r + n, n)).bits();
    return Elem(*F, prog->eval_bits(*F, bits));
  };
}

std::uint64_t prf(std::uint64_t shared_seed, std::uint64_t salt, std::uint64_t point) {
  return mix64(mix64(shared_seed ^ mix64(salt)) + point);
}

class ExtensionStrategy : public ProverStrategy {
 public:
  ExtensionStrategy(std::string name, const ProtocolConfig& config, const Assignment& table, bool best_effort)
      : name_(std::move(name)),
        g_(std::make_shared<MultilinearFn>(extend(*config.field, table))) {
    auto g = g_;
    Oracle h = lookup_summand(config, [g](std::span<const Elem> b) { return eval_ml(*g, b); });
    prover_ = best_effort ? best_effort_and_prover(config.and_params(), h)
                          : honest_and_prover(config.and_params(), h);
  }
  std::string name() const override { return name_; }
  std::optional<Elem> lookup(std::span<const Elem> x) override { return eval_ml(*g_, x); }
  RoundHandler and_test(const AndTestParams&, const Seed& seed) override { return prover_(seed); }

 protected:
  std::string name_;
  std::shared_ptr<MultilinearFn> g_;
  AndProver prover_;
};

class ConstantStrategy : public ProverStrategy {
 public:
  explicit ConstantStrategy(Elem c) : c_(c) {}
  std::string name() const override { return "constant"; }
  std::optional<Elem> lookup(std::span<const Elem>) override { return c_; }
  RoundHandler and_test(const AndTestParams& params, const Seed&) override {
    const Field* F = params.field;
    return [F](std::span<const Elem>) { return UnivariatePoly(*F); };
  }

 private:
  Elem c_;
};

class SharedRandomStrategy : public ProverStrategy {
 public:
  explicit SharedRandomStrategy(const ProtocolConfig& config) : F_(config.field) {
    auto* self = this;
    Oracle h = lookup_summand(config, [self](std::span<const Elem> b) { return self->table(b); });
    prover_ = best_effort_and_prover(config.and_params(), h);
  }
  std::string name() const override { return "shared-random"; }
  void begin_run(std::uint64_t shared_seed) override { shared_ = shared_seed; }
  std::optional<Elem> lookup(std::span<const Elem> x) override { return table(x); }
  RoundHandler and_test(const AndTestParams&, const Seed& seed) override { return prover_(seed); }

 private:
  Elem table(std::span<const Elem> x) const {
    return Elem(*F_, prf(shared_, 0x7461626c65, point_index(x)) & F_->mask());
  }
  const Field* F_;
  std::uint64_t shared_ = 0;
  AndProver prover_;
};

class PerturbedStrategy : public ExtensionStrategy {
 public:
  PerturbedStrategy(const ProtocolConfig& config, const Assignment& witness, double delta)
      : ExtensionStrategy("perturbed", config, witness, false), F_(config.field) {
    if (!(delta >= 0 && delta <= 1)) throw ConfigError("corruption rate must lie in [0, 1]");
    threshold_ = delta >= 1 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(std::ldexp(delta, 64));
  }
  void begin_run(std::uint64_t shared_seed) override { shared_ = shared_seed; }
  std::optional<Elem> lookup(std::span<const Elem> x) override {
    const std::uint64_t idx = point_index(x);
    if (threshold_ != 0 && prf(shared_, 0x636f7272, idx) < threshold_) {
      return Elem(*F_, prf(shared_, 0x76616c, idx) & F_->mask());
    }
    return eval_ml(*g_, x);
  }

 private:
  const Field* F_;
  std::uint64_t threshold_ = 0;
  std::uint64_t shared_ = 0;
};

}  // namespace

std::unique_ptr<ProverStrategy> honest_strategy(const ProtocolConfig& config, const Assignment& witness) {
  if (!verify_assignment(config.instance, witness, config.alpha)) {
    throw ConfigError("honest strategy needs a witness satisfying every constraint");
  }
  return std::make_unique<ExtensionStrategy>("honest", config, witness, false);
}

std::unique_ptr<ProverStrategy> constant_answerer(const Elem& c) { return std::make_unique<ConstantStrategy>(c); }

std::unique_ptr<ProverStrategy> shared_random_table(const ProtocolConfig& config) {
  return std::make_unique<SharedRandomStrategy>(config);
}

std::unique_ptr<ProverStrategy> perturbed_multilinear(const ProtocolConfig& config, const Assignment& witness,
                                                      double delta) {
  return std::make_unique<PerturbedStrategy>(config, witness, delta);
}

std::unique_ptr<ProverStrategy> honest_on_no_instance(const ProtocolConfig& config, const Assignment& assignment) {
  return std::make_unique<ExtensionStrategy>("no-instance", config, assignment, true);
}

StrategyFactory make_uniform_factory(const ProtocolConfig& config, const std::string& name,
                                     const Assignment& witness, double param) {
  auto make_one = [&config, name, witness, param]() -> std::unique_ptr<ProverStrategy> {
    if (name == "honest") return honest_strategy(config, witness);
    if (name == "constant") return constant_answerer(config.field->elem(static_cast<std::uint64_t>(param)));
    if (name == "shared-random") return shared_random_table(config);
    if (name == "perturbed") return perturbed_multilinear(config, witness, param);
    if (name == "no-instance") return honest_on_no_instance(config, witness);
    throw ConfigError("unknown strategy '" + name + "'");
  };
  make_one();  // validate eagerly
  return [make_one] { return StrategyTriple{make_one(), make_one(), make_one()}; };
}

// ---------------------------------------------------------------------------
// Estimation

double Estimate::rate() const { return trials ? static_cast<double>(accepts) / static_cast<double>(trials) : 0; }
double Estimate::halfwidth() const { return hoeffding_halfwidth(trials, beta); }
double Estimate::lower() const { return std::max(0.0, rate() - halfwidth()); }
double Estimate::upper() const { return std::min(1.0, rate() + halfwidth()); }

bool sequential_repeat(const ProtocolConfig& config, const StrategyTriple& provers, Rng& rng,
                       std::uint64_t shared_seed_base) {
  if (config.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  bool all = true;
  for (unsigned rep = 0; rep < config.repetitions; ++rep) {
    all &= run_protocol(config, provers, rng, derive_seed(shared_seed_base, 0, rep)).accepted;
  }
  return all;
}

Estimate estimate_acceptance(const ProtocolConfig& config, const StrategyFactory& factory, std::uint64_t trials,
                             unsigned threads, double beta,
                             const std::function<void(std::uint64_t, const RunRecord&)>& sink) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (config.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  threads = std::max(1u, threads);
  struct Outcome {
    std::uint8_t test = 0;
    bool accepted = false;
  };
  std::vector<Outcome> outcomes(trials);
  // Records are buffered only when a sink wants them, then replayed in order.
  std::vector<std::vector<RunRecord>> records(sink ? trials : 0);
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    try {
      StrategyTriple provers = factory();
      for (std::uint64_t t = next++; t < trials; t = next++) {
        Rng rng(derive_seed(config.seed, 1, t));
        const std::uint64_t shared = derive_seed(config.seed, 2, t);
        bool all = true;
        for (unsigned rep = 0; rep < config.repetitions; ++rep) {
          RunRecord rec = run_protocol(config, provers, rng, derive_seed(shared, 0, rep));
          if (rep == 0) outcomes[t].test = static_cast<std::uint8_t>(rec.test);
          all &= rec.accepted;
          if (sink) records[t].push_back(std::move(rec));
        }
        outcomes[t].accepted = all;
      }
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next = trials;
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  Estimate est;
  est.trials = trials;
  est.beta = beta;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto b = static_cast<std::size_t>(outcomes[t].test - 1);
    ++est.branch_trials[b];
    if (outcomes[t].accepted) {
      ++est.accepts;
      ++est.branch_accepts[b];
    }
    if (sink)
      for (const auto& rec : records[t]) sink(t, rec);
  }
  return est;
}

MarginalAudit marginal_audit(const ProtocolConfig& config, const StrategyFactory& factory, std::uint64_t trials,
                             std::optional<TestKind> only) {
  const std::uint64_t cells = std::uint64_t{1} << (config.field->k() * config.instance.n);
  if (cells > (1u << 16)) throw SizeGuardError("marginal audit needs |F|^n <= 2^16");
  MarginalAudit audit;
  for (auto& c : audit.counts) c.assign(cells, 0);
  StrategyTriple provers = factory();
  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(config.seed, 3, t));
    const std::uint64_t shared = derive_seed(config.seed, 4, t);
    RunRecord rec = only ? run_protocol_test(config, provers, *only, rng, shared)
                         : run_protocol(config, provers, rng, shared);
    for (int p = 0; p < 3; ++p)
      for (const auto& q : rec.questions[p]) ++audit.counts[p][point_index(q)];
  }
  for (int p = 0; p < 3; ++p) {
    std::uint64_t total = 0;
    for (auto c : audit.counts[p]) total += c;
    audit.pvalue[p] = total ? chi_square_uniform_pvalue(audit.counts[p]) : 1.0;
  }
  return audit;
}

}  // namespace mipsim
