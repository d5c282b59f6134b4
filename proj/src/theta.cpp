#include "affmetric/theta.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "affmetric/basis.hpp"
#include "affmetric/constructible.hpp"
#include "affmetric/evaluator.hpp"

namespace affmetric {

const char* mode_name(Mode m) { return m == Mode::Algorithmic ? "algorithmic" : "elementary"; }

Mode parse_mode(const std::string& text) {
  if (text == "algorithmic") return Mode::Algorithmic;
  if (text == "elementary") return Mode::Elementary;
  throw std::invalid_argument("unknown mode '" + text + "' (expected algorithmic or elementary)");
}

int min_ell(Mode m) { return m == Mode::Algorithmic ? 2 : 3; }

ThetaFormula theta2_seed(Mode m) {
  if (m == Mode::Algorithmic) {
    std::vector<VarId> v = {fresh_var("x"), fresh_var("y"), fresh_var("z"), fresh_var("w")};
    return {theta2_combination(v), v};
  }
  auto e = elementary_theta2(false);
  return {e.formula, e.free};
}

ThetaFormula double_theta(const ThetaFormula& theta_m, const ThetaFormula& theta2) {
  if (theta2.free.size() != 4) throw FormulaError("double_theta: the skeleton must have four free variables");
  if (theta_m.free.size() < 2 || theta_m.free.size() % 2)
    throw FormulaError("double_theta: the inner formula needs 2m free variables");
  int m = theta_m.n();
  auto a = fresh_vars("a", 2 * m), b = fresh_vars("b", 2 * m);
  std::unordered_map<VarId, std::vector<VarId>> tuples;
  tuples[theta2.free[0]] = std::vector<VarId>(a.begin(), a.begin() + m);
  tuples[theta2.free[1]] = std::vector<VarId>(a.begin() + m, a.end());
  tuples[theta2.free[2]] = std::vector<VarId>(b.begin(), b.begin() + m);
  tuples[theta2.free[3]] = std::vector<VarId>(b.begin() + m, b.end());
  ThetaFormula out;
  out.formula = replace_metric(theta2.formula, theta_m.formula, theta_m.free, tuples);
  out.free = a;
  out.free.insert(out.free.end(), b.begin(), b.end());
  return out;
}

ThetaFormula pad(const ThetaFormula& theta_pow, int n) {
  int k = theta_pow.n();
  if (n > k || 2 * n <= k) throw std::invalid_argument("pad: n must satisfy k/2 < n <= k");
  if (n == k) return theta_pow;
  VarId a1 = theta_pow.free[0];
  VarMap map;
  for (int i = n; i < k; ++i) {
    map[theta_pow.free[i]] = a1;
    map[theta_pow.free[k + i]] = a1;
  }
  ThetaFormula out;
  out.formula = substitute_vars(theta_pow.formula, map);
  out.free.assign(theta_pow.free.begin(), theta_pow.free.begin() + n);
  out.free.insert(out.free.end(), theta_pow.free.begin() + k, theta_pow.free.begin() + k + n);
  return out;
}

namespace {

ThetaArtifact assemble(int n, Mode mode, bool literal) {
  if (n < 2) throw std::invalid_argument("theta_n needs n >= 2");
  ThetaFormula theta;
  if (n == 2) {
    if (mode == Mode::Algorithmic) {
      std::vector<VarId> v = {fresh_var("x"), fresh_var("y"), fresh_var("z"), fresh_var("w")};
      theta = {assemble_theta2(v), v};
    } else {
      auto e = elementary_theta2(literal);
      theta = {e.formula, e.free};
    }
  } else {
    ThetaFormula seed = theta2_seed(mode);
    theta = seed;
    int m = 2;
    while (m < n) {
      theta = double_theta(theta, seed);
      m *= 2;
    }
    theta = pad(theta, n);
  }
  ThetaArtifact out;
  out.n = n;
  out.mode = mode;
  out.literal = literal;
  out.min_ell = min_ell(mode);
  auto a = fresh_vars("a", n), b = fresh_vars("b", n);
  out.free = a;
  out.free.insert(out.free.end(), b.begin(), b.end());
  VarMap map;
  for (std::size_t i = 0; i < out.free.size(); ++i) map[theta.free[i]] = out.free[i];
  out.formula = substitute_vars(theta.formula, map);
  if (out.formula->free_vars() != out.free)
    throw FormulaError("theta_" + std::to_string(n) + ": free variables do not occur in declared order");
  out.prenex = to_prenex(out.formula);
  out.alternations = count_alternations(out.prenex);
  return out;
}

}  // namespace

const ThetaArtifact& build_theta(int n, Mode mode, bool literal) {
  static std::mutex mu;
  static std::map<std::tuple<int, Mode, bool>, ThetaArtifact> cache;
  if (mode == Mode::Algorithmic) literal = false;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(n, mode, literal);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  return cache.emplace(key, assemble(n, mode, literal)).first->second;
}

std::vector<TupleType> choose_types(int n, int ell, const Strategy& strategy) {
  int len = 2 * n;
  if (strategy.kind == Strategy::Exhaustive) return enumerate_types(len, std::min(len, ell));
  std::uint64_t available = count_types(len, std::min(len, ell));
  std::uint64_t target = std::min<std::uint64_t>(strategy.count, available);
  std::mt19937_64 rng(strategy.seed);
  std::set<TupleType> seen;
  std::vector<int> labels(len);
  std::uint64_t draws = 0, max_draws = 1000 * (target + 1);
  while (seen.size() < target && draws++ < max_draws) {
    for (auto& l : labels) l = static_cast<int>(rng() % static_cast<std::uint64_t>(ell));
    seen.insert(type_of(labels));
  }
  return {seen.begin(), seen.end()};
}

VerificationReport verify_formula(const Formula& f, const std::vector<VarId>& free, int ell,
                                  const Strategy& strategy, unsigned workers) {
  if (free.empty() || free.size() % 2) throw std::invalid_argument("verify: formula needs 2n free variables");
  if (ell < 1) throw std::invalid_argument("verify: ell must be positive");
  auto start = std::chrono::steady_clock::now();
  VerificationReport rep;
  rep.n = static_cast<int>(free.size() / 2);
  rep.ell = ell;
  rep.strategy = strategy;
  auto types = choose_types(rep.n, ell, strategy);
  rep.types_checked = types.size();

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, types.size())));
  std::vector<std::vector<Mismatch>> found(workers);
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&](unsigned w) {
    try {
      for (std::size_t i = w; i < types.size(); i += workers) {
        Rational got = eval_type(f, free, types[i], ell);
        int expected = eval_dn(types[i]);
        if (got != Rational(expected)) found[w].push_back({types[i], expected, got});
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (auto& part : found) rep.mismatches.insert(rep.mismatches.end(), part.begin(), part.end());
  std::sort(rep.mismatches.begin(), rep.mismatches.end(),
            [](const Mismatch& x, const Mismatch& y) { return x.type < y.type; });
  rep.alternations = count_alternations(to_prenex(f));
  rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

VerificationReport verify_theta(const ThetaArtifact& artifact, int ell, const Strategy& strategy, unsigned workers) {
  auto start = std::chrono::steady_clock::now();
  VerificationReport rep = verify_formula(artifact.formula, artifact.free, ell, strategy, workers);
  rep.mode = mode_name(artifact.mode);
  rep.alternations = artifact.alternations;
  rep.informational = ell < artifact.min_ell;
  rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::string report_json(const VerificationReport& r, bool timing) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  if (!r.mode.empty()) j["mode"] = r.mode;
  j["ell"] = r.ell;
  j["strategy"] = r.strategy.kind == Strategy::Exhaustive ? "exhaustive" : "sample";
  if (r.strategy.kind == Strategy::Sample) {
    j["sample"] = r.strategy.count;
    j["seed"] = r.strategy.seed;
  }
  j["types_checked"] = r.types_checked;
  auto mm = nlohmann::ordered_json::array();
  for (const auto& m : r.mismatches) {
    nlohmann::ordered_json e;
    e["type"] = m.type;
    e["expected"] = m.expected;
    e["got"] = m.got.str();
    mm.push_back(e);
  }
  j["mismatches"] = mm;
  j["alternations"] = r.alternations;
  if (r.informational) j["informational"] = true;
  if (timing) j["elapsed_ms"] = r.elapsed_ms;
  return j.dump(2);
}

}  // namespace affmetric
