#include "mipsim/mlgame.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "mipsim/stats.hpp"

namespace mipsim {

MLGameConfig::MLGameConfig(unsigned r_, std::size_t n_, const Field& f) : r(r_), n(n_), field(&f) {
  if (r < 3) throw ConfigError("the multilinearity game needs r >= 3 players");
  if (n < 1) throw ConfigError("the multilinearity game needs n >= 1");
  if (f.size() < 4) throw ConfigError("the multilinearity game needs |F| >= 4, got " + f.name());
  if (f.k() * n > 24) throw SizeGuardError("|F|^n above 2^24");
}

std::uint64_t MLGameConfig::points() const { return std::uint64_t{1} << (field->k() * n); }

Elem FunctionTable::operator()(std::span<const Elem> x) const {
  if (x.size() != n) throw DomainError("point has the wrong number of coordinates");
  return at(point_index(x));
}

FunctionTable table_of(const Field& field, std::size_t n, const std::function<Elem(std::span<const Elem>)>& f) {
  if (field.k() * n > 24) throw SizeGuardError("|F|^n above 2^24");
  FunctionTable t{&field, n, {}};
  const std::uint64_t count = std::uint64_t{1} << (field.k() * n);
  t.values.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) t.values[i] = f(point_from_index(field, n, i)).bits();
  return t;
}

FunctionTable table_of(const MultilinearFn& g) {
  return table_of(g.field(), g.arity(), [&](std::span<const Elem> x) { return eval_ml(g, x); });
}

FunctionTable random_table(const Field& field, std::size_t n, Rng& rng) {
  return table_of(field, n, [&](std::span<const Elem>) { return field.sample(rng); });
}

FunctionTable perturb(const FunctionTable& t, double rate, std::uint64_t seed) {
  if (!(rate >= 0 && rate <= 1)) throw ConfigError("perturbation rate must lie in [0, 1]");
  const std::uint64_t threshold = rate >= 1 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(std::ldexp(rate, 64));
  FunctionTable out = t;
  for (std::uint64_t i = 0; i < out.values.size(); ++i) {
    if (threshold != 0 && mix64(derive_seed(seed, 6, i)) < threshold) {
      out.values[i] = mix64(derive_seed(seed, 7, i)) & t.field->mask();
    }
  }
  return out;
}

bool is_multilinear(const FunctionTable& t) {
  const Field& F = *t.field;
  std::vector<Elem> cube;
  for (std::uint64_t b = 0; b < (std::uint64_t{1} << t.n); ++b) {
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < t.n; ++i) idx |= (b >> i & 1) << (F.k() * i);
    cube.push_back(t.at(idx));
  }
  return table_of(extend(F, cube)) == t;
}

ClassicalStrategy ClassicalStrategy::pure(DeterministicStrategy s) { return {{1.0}, {std::move(s)}}; }

ClassicalStrategy ClassicalStrategy::shared(FunctionTable t) { return pure({{std::move(t)}}); }

ClassicalStrategy ClassicalStrategy::mixture(const std::vector<std::pair<double, ClassicalStrategy>>& parts) {
  ClassicalStrategy out;
  for (const auto& [w, s] : parts)
    for (std::size_t c = 0; c < s.components.size(); ++c) {
      out.weights.push_back(w * s.weights[c]);
      out.components.push_back(s.components[c]);
    }
  return out;
}

void validate(const MLGameConfig& config, const ClassicalStrategy& s) {
  if (s.components.empty() || s.weights.size() != s.components.size()) {
    throw ConfigError("strategy needs one weight per component");
  }
  double total = 0;
  for (double w : s.weights) {
    if (!(w >= 0)) throw ConfigError("mixture weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1) > 1e-9) throw ConfigError("mixture weights must sum to 1");
  for (const auto& c : s.components) {
    if (c.players.size() != 1 && c.players.size() != config.r) {
      throw ConfigError("a strategy needs one shared function or one per player");
    }
    for (const auto& t : c.players) {
      if (t.field != config.field || t.n != config.n || t.values.size() != config.points()) {
        throw ConfigError("function table does not match the game's field and n");
      }
    }
  }
}

nlohmann::json PlayRecord::to_json() const {
  nlohmann::json j;
  j["branch"] = branch == MLBranch::kConsistency ? "consistency" : "linearity";
  j["component"] = component;
  j["players"] = players;
  auto qs = nlohmann::json::array();
  for (const auto& q : questions) {
    auto v = nlohmann::json::array();
    for (const auto& e : q) v.push_back(e.hex());
    qs.push_back(v);
  }
  j["questions"] = qs;
  auto as = nlohmann::json::array();
  for (const auto& a : answers) as.push_back(a.hex());
  j["answers"] = as;
  if (branch == MLBranch::kLinearity) j["axis"] = axis;
  j["accepted"] = accepted;
  return j;
}

namespace {

bool collinear_bits(const Field& F, std::uint64_t x, std::uint64_t y, std::uint64_t z, std::uint64_t a,
                    std::uint64_t b, std::uint64_t c) {
  // (b - a)(z - y) = (c - b)(y - x) with x, y, z distinct.
  return F.mul_bits(a ^ b, y ^ z) == F.mul_bits(b ^ c, x ^ y);
}

std::size_t pick_component(const ClassicalStrategy& s, Rng& rng) {
  if (s.components.size() == 1) return 0;
  std::discrete_distribution<std::size_t> dist(s.weights.begin(), s.weights.end());
  return dist(rng);
}

std::array<unsigned, 3> pick_triple(unsigned r, Rng& rng) {
  if (r == 3) return {0, 1, 2};
  const auto a = static_cast<unsigned>(uniform_below(rng, r));
  auto b = static_cast<unsigned>(uniform_below(rng, r - 1));
  if (b >= a) ++b;
  auto c = static_cast<unsigned>(uniform_below(rng, r - 2));
  for (unsigned lo : {std::min(a, b), std::max(a, b)})
    if (c >= lo) ++c;
  return {a, b, c};
}

}  // namespace

PlayRecord play(const MLGameConfig& config, const ClassicalStrategy& s, Rng& rng) {
  const Field& F = *config.field;
  PlayRecord rec;
  rec.component = pick_component(s, rng);
  const DeterministicStrategy& d = s.components[rec.component];
  rec.branch = uniform_below(rng, 2) == 0 ? MLBranch::kConsistency : MLBranch::kLinearity;
  std::vector<Elem> x;
  for (std::size_t i = 0; i < config.n; ++i) x.push_back(F.sample(rng));
  if (rec.branch == MLBranch::kConsistency) {
    rec.accepted = true;
    for (unsigned j = 0; j < config.r; ++j) {
      rec.players.push_back(j);
      rec.questions.push_back(x);
      rec.answers.push_back(d.player(j)(x));
      rec.accepted &= rec.answers.back() == rec.answers.front();
    }
    return rec;
  }
  rec.axis = uniform_below(rng, config.n);
  const Elem xi = x[rec.axis];
  const Elem yi = F.sample_except(rng, xi);
  Elem zi = F.sample_except(rng, xi);
  while (zi == yi) zi = F.sample_except(rng, xi);
  const auto triple = pick_triple(config.r, rng);
  std::vector<Elem> y = x, z = x;
  y[rec.axis] = yi;
  z[rec.axis] = zi;
  rec.questions = {x, y, z};
  for (int t = 0; t < 3; ++t) {
    rec.players.push_back(triple[t]);
    rec.answers.push_back(d.player(triple[t])(rec.questions[t]));
  }
  rec.accepted = collinear_bits(F, xi.bits(), yi.bits(), zi.bits(), rec.answers[0].bits(), rec.answers[1].bits(),
                                rec.answers[2].bits());
  return rec;
}

MLValue acceptance_exact(const MLGameConfig& config, const DeterministicStrategy& s) {
  validate(config, ClassicalStrategy::pure(s));
  const Field& F = *config.field;
  const std::uint64_t P = config.points(), p = F.size(), k = F.k();
  if (static_cast<double>(P) * static_cast<double>(config.n) * static_cast<double>(p * p) > 1e7) {
    throw SizeGuardError("exact referee enumeration above 10^7 outcomes");
  }
  MLValue v;
  std::int64_t agree = 0;
  for (std::uint64_t x = 0; x < P; ++x) {
    bool ok = true;
    for (unsigned j = 1; j < config.r && ok; ++j) ok = s.player(j).values[x] == s.player(0).values[x];
    agree += ok;
  }
  v.consistency = Rational(agree, static_cast<std::int64_t>(P));

  std::vector<std::array<unsigned, 3>> triples;
  if (config.r == 3) {
    triples.push_back({0, 1, 2});
  } else {
    for (unsigned a = 0; a < config.r; ++a)
      for (unsigned b = 0; b < config.r; ++b)
        for (unsigned c = 0; c < config.r; ++c)
          if (a != b && b != c && a != c) triples.push_back({a, b, c});
  }
  Rational lin(0);
  for (const auto& [ia, ib, ic] : triples) {
    const auto& fa = s.player(ia).values;
    const auto& fb = s.player(ib).values;
    const auto& fc = s.player(ic).values;
    std::int64_t hits = 0;
    for (std::size_t i = 0; i < config.n; ++i) {
      const unsigned shift = static_cast<unsigned>(k * i);
      for (std::uint64_t x = 0; x < P; ++x) {
        const std::uint64_t xi = (x >> shift) & F.mask();
        const std::uint64_t base = x ^ (xi << shift);
        for (std::uint64_t y = 0; y < p; ++y) {
          if (y == xi) continue;
          for (std::uint64_t z = 0; z < p; ++z) {
            if (z == xi || z == y) continue;
            hits += collinear_bits(F, xi, y, z, fa[x], fb[base | (y << shift)], fc[base | (z << shift)]);
          }
        }
      }
    }
    const auto denom = static_cast<std::int64_t>(config.n * P * (p - 1) * (p - 2));
    lin += Rational(hits, denom);
  }
  v.linearity = lin / static_cast<std::int64_t>(triples.size());
  return v;
}

double acceptance_exact(const MLGameConfig& config, const ClassicalStrategy& s) {
  validate(config, s);
  double total = 0;
  for (std::size_t c = 0; c < s.components.size(); ++c) {
    total += s.weights[c] * boost::rational_cast<double>(acceptance_exact(config, s.components[c]).total());
  }
  return total;
}

double MLEstimate::rate() const { return trials ? static_cast<double>(accepts) / static_cast<double>(trials) : 0; }
double MLEstimate::halfwidth() const { return hoeffding_halfwidth(trials, beta); }

MLEstimate estimate_game(const MLGameConfig& config, const ClassicalStrategy& s, std::uint64_t trials,
                         std::uint64_t seed, unsigned threads, double beta,
                         const std::function<void(std::uint64_t, const PlayRecord&)>& sink) {
  validate(config, s);
  if (trials < 1) throw ConfigError("trials must be >= 1");
  threads = std::max(1u, threads);
  std::vector<PlayRecord> records(trials);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t t = next++; t < trials; t = next++) {
      Rng rng(derive_seed(seed, 5, t));
      records[t] = play(config, s, rng);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  MLEstimate est;
  est.trials = trials;
  est.beta = beta;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const auto b = static_cast<std::size_t>(records[t].branch);
    ++est.branch_trials[b];
    if (records[t].accepted) {
      ++est.accepts;
      ++est.branch_accepts[b];
    }
    if (sink) sink(t, records[t]);
  }
  return est;
}

QuestionAudit audit_questions(const MLGameConfig& config, std::uint64_t trials, std::uint64_t seed) {
  if (config.points() > (1u << 16)) throw SizeGuardError("question audit needs |F|^n <= 2^16");
  // Answers do not influence the questions, so any strategy will do.
  const auto zero = ClassicalStrategy::shared(FunctionTable{config.field, config.n,
                                                            std::vector<std::uint64_t>(config.points(), 0)});
  QuestionAudit audit;
  audit.counts.assign(config.r, std::vector<std::uint64_t>(config.points(), 0));
  for (std::uint64_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, 5, t));
    const auto rec = play(config, zero, rng);
    for (std::size_t q = 0; q < rec.players.size(); ++q) ++audit.counts[rec.players[q]][point_index(rec.questions[q])];
  }
  for (const auto& c : audit.counts) audit.pvalue.push_back(chi_square_uniform_pvalue(c));
  return audit;
}

// ---------------------------------------------------------------------------
// Descriptors

namespace {

class Tokens {
 public:
  explicit Tokens(const std::string& text) {
    std::string cur;
    auto flush = [&] {
      if (!cur.empty()) toks_.push_back(std::move(cur));
      cur.clear();
    };
    for (char ch : text) {
      if (ch == '[' || ch == ']' || ch == ';') {
        flush();
        toks_.emplace_back(1, ch);
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        flush();
      } else {
        cur += ch;
      }
    }
    flush();
  }
  bool done() const { return pos_ >= toks_.size(); }
  const std::string& peek() const {
    if (done()) throw ConfigError("strategy descriptor ends early");
    return toks_[pos_];
  }
  std::string next() {
    std::string t = peek();
    ++pos_;
    return t;
  }
  void expect(const std::string& t) {
    if (next() != t) throw ConfigError("strategy descriptor: expected '" + t + "'");
  }

 private:
  std::vector<std::string> toks_;
  std::size_t pos_ = 0;
};

std::vector<std::uint64_t> parse_hex_list(const Field& F, const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(parse_elem(F, item).bits());
  }
  return out;
}

FunctionTable cube_table(const MLGameConfig& config, const std::string& text) {
  const Field& F = *config.field;
  const auto vals = parse_hex_list(F, text);
  if (vals.size() != (std::size_t{1} << config.n)) {
    throw ConfigError("multilinear table needs 2^n = " + std::to_string(std::size_t{1} << config.n) + " values");
  }
  std::vector<Elem> cube;
  for (auto v : vals) cube.push_back(F.elem(v));
  return table_of(extend(F, cube));
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw ConfigError("strategy descriptor: bad number '" + s + "'");
  return v;
}

ClassicalStrategy parse_desc(const MLGameConfig& config, Tokens& tk, const std::string& base_dir) {
  const std::string kind = tk.next();
  if (kind == "multilinear") return ClassicalStrategy::shared(cube_table(config, tk.next()));
  if (kind == "perturbed") {
    const FunctionTable t = cube_table(config, tk.next());
    const double rate = parse_number(tk.next());
    std::uint64_t seed = 0;
    if (!tk.done() && tk.peek() != ";" && tk.peek() != "]") seed = static_cast<std::uint64_t>(parse_number(tk.next()));
    return ClassicalStrategy::shared(perturb(t, rate, seed));
  }
  if (kind == "function-table") {
    const std::filesystem::path path = std::filesystem::path(base_dir) / tk.next();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open function table " + path.string());
    return ClassicalStrategy::pure(read_function_tables(config, in));
  }
  if (kind == "mixture" || kind == "players") {
    tk.expect("[");
    std::vector<std::pair<double, ClassicalStrategy>> parts;
    DeterministicStrategy tuple;
    while (true) {
      if (kind == "mixture") {
        const double w = parse_number(tk.next());
        parts.emplace_back(w, parse_desc(config, tk, base_dir));
      } else {
        auto s = parse_desc(config, tk, base_dir);
        if (s.components.size() != 1 || s.components[0].players.size() != 1) {
          throw ConfigError("players [...] entries must be single deterministic functions");
        }
        tuple.players.push_back(s.components[0].players[0]);
      }
      const std::string sep = tk.next();
      if (sep == "]") break;
      if (sep != ";") throw ConfigError("strategy descriptor: expected ';' or ']'");
    }
    if (kind == "players") {
      if (tuple.players.size() != config.r) throw ConfigError("players [...] needs exactly r entries");
      return ClassicalStrategy::pure(std::move(tuple));
    }
    return ClassicalStrategy::mixture(parts);
  }
  throw ConfigError("unknown strategy '" + kind + "'");
}

}  // namespace

DeterministicStrategy read_function_tables(const MLGameConfig& config, std::istream& in) {
  DeterministicStrategy s;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    for (char& ch : line)
      if (std::isspace(static_cast<unsigned char>(ch))) ch = ',';
    auto vals = parse_hex_list(*config.field, line);
    if (vals.empty()) continue;
    if (vals.size() != config.points()) {
      throw ConfigError("function table line needs |F|^n = " + std::to_string(config.points()) + " values");
    }
    s.players.push_back(FunctionTable{config.field, config.n, std::move(vals)});
  }
  if (s.players.size() != 1 && s.players.size() != config.r) {
    throw ConfigError("function table file needs 1 or r lines");
  }
  return s;
}

ClassicalStrategy parse_strategy(const MLGameConfig& config, const std::string& descriptor,
                                 const std::string& base_dir) {
  Tokens tk(descriptor);
  auto s = parse_desc(config, tk, base_dir);
  if (!tk.done()) throw ConfigError("strategy descriptor has trailing text '" + tk.peek() + "'");
  validate(config, s);
  return s;
}

}  // namespace mipsim
