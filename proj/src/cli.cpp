#include "affmetric/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "affmetric/basis.hpp"
#include "affmetric/constructible.hpp"
#include "affmetric/evaluator.hpp"
#include "affmetric/prenex.hpp"
#include "affmetric/sexpr.hpp"
#include "affmetric/theta.hpp"
#include "affmetric/types.hpp"

namespace affmetric {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  out << text;
}

std::vector<VarId> xyzw() { return {fresh_var("x"), fresh_var("y"), fresh_var("z"), fresh_var("w")}; }

std::string two_digits(int i) { return (i < 10 ? "0" : "") + std::to_string(i); }

std::string prefix_text(const PrenexForm& p) {
  std::string out;
  for (const auto& [kind, var] : p.prefix) {
    if (!out.empty()) out += ' ';
    out += kind_name(kind);
  }
  return out;
}

// Artifacts written by derive.
std::map<std::string, std::string> derive_files(std::size_t* rank_out) {
  std::map<std::string, std::string> files;
  auto v = xyzw();
  auto types = enumerate_types(4, 4);
  auto basis = build_basis(v);
  auto m = value_matrix(basis, v, types, 4);
  if (rank_out) *rank_out = exact_rank(m);
  files["derive/matrix.csv"] = matrix_csv(m, types);
  files["derive/coefficients.json"] = coefficients_json(solve_target(m, d2_target(types))) + "\n";
  files["derive/paper_coefficients.json"] = coefficients_json(theta2_coefficients()) + "\n";
  files["derive/theta2_combination.sexp"] = format_formula_file(theta2_combination(v), v);
  files["derive/theta2_prenex.sexp"] = format_formula_file(assemble_theta2(v), v);
  for (int i = 1; i <= 15; ++i) files["derive/phi" + two_digits(i) + ".sexp"] = format_formula_file(basis[i - 1], v);
  return files;
}

std::string theta_file(int n, Mode mode, bool literal) {
  const auto& a = build_theta(n, mode, literal);
  return format_formula_file(a.formula, a.free);
}

std::string set_file(const ConstructibleSet& s) { return format_formula_file(s.defining, s.all_vars()); }

}  // namespace

std::map<std::string, std::string> golden_files() {
  auto files = derive_files(nullptr);
  files["theta/theta2_algorithmic.sexp"] = theta_file(2, Mode::Algorithmic, false);
  files["theta/theta2_elementary.sexp"] = theta_file(2, Mode::Elementary, false);
  files["theta/theta2_elementary_literal.sexp"] = theta_file(2, Mode::Elementary, true);
  files["theta/theta3_algorithmic.sexp"] = theta_file(3, Mode::Algorithmic, false);
  files["theta/theta4_algorithmic.sexp"] = theta_file(4, Mode::Algorithmic, false);
  for (const auto& name : named_set_names()) files["sets/" + name + ".sexp"] = set_file(build_named(name));
  return files;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Affine formulas for trivial metrics on tuples", "affmetric"};
  app.require_subcommand(1);

  int n = 0;
  int cap = 0;
  int ell = 4;
  bool json = false;
  std::string file, type_text, out_path, mode_text = "algorithmic", formula_path, name, dir = "golden";
  bool literal = false, exhaustive = false, timing = false, check = false, write = false;
  std::uint64_t sample = 0, seed = 0;
  unsigned workers = 0;
  std::string coeffs_path;

  auto* types_cmd = app.add_subcommand("types", "List types of n-tuples");
  types_cmd->add_option("n", n, "Tuple length")->required()->check(CLI::Range(1, 20));
  types_cmd->add_option("--cap", cap, "Largest number of classes (default n)")->check(CLI::Range(1, 20));
  types_cmd->add_flag("--json", json, "JSON output");

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a formula file at a type");
  eval_cmd->add_option("file", file, "Formula file")->required();
  eval_cmd->add_option("type", type_text, "Type of the free variables, e.g. 0101")->required();
  eval_cmd->add_option("--ell", ell, "Structure cardinality")->check(CLI::Range(1, 64));

  auto* derive_cmd = app.add_subcommand("derive", "Rank of the basis and the d2 coefficients");
  derive_cmd->add_option("--out", out_path, "Directory for matrix, coefficients and formulas");

  auto* coeffs_cmd = app.add_subcommand("check-coeffs", "Check a coefficient vector against the basis system");
  coeffs_cmd->add_option("--coeffs", coeffs_path, "Coefficient JSON (default: the built-in vector)");

  auto* build_cmd = app.add_subcommand("build", "Build theta_n");
  build_cmd->add_option("n", n, "Tuple length")->required()->check(CLI::Range(2, 64));
  build_cmd->add_option("--mode", mode_text, "algorithmic or elementary");
  build_cmd->add_flag("--literal", literal, "Keep the symbolic inner infimum (elementary)");
  build_cmd->add_option("--out", out_path, "Output file (default stdout)");

  auto* verify_cmd = app.add_subcommand("verify", "Compare theta_n with d_n");
  verify_cmd->add_option("n", n, "Tuple length")->check(CLI::Range(2, 64));
  verify_cmd->add_option("--formula", formula_path, "Formula file instead of a built theta_n");
  verify_cmd->add_option("--mode", mode_text, "algorithmic or elementary");
  verify_cmd->add_flag("--literal", literal, "Literal elementary form");
  verify_cmd->add_option("--ell", ell, "Structure cardinality")->check(CLI::Range(1, 64));
  auto* exh = verify_cmd->add_flag("--exhaustive", exhaustive, "Every type (default)");
  auto* smp = verify_cmd->add_option("--sample", sample, "Number of sampled types")->check(CLI::PositiveNumber);
  auto* sd = verify_cmd->add_option("--seed", seed, "Sampling seed");
  exh->excludes(smp);
  sd->needs(smp);
  verify_cmd->add_option("--workers", workers, "Worker threads (default all cores)");
  verify_cmd->add_flag("--json", json, "JSON report");
  verify_cmd->add_flag("--timing", timing, "Include elapsed_ms");

  auto* prenex_cmd = app.add_subcommand("prenex", "Prenex form and alternation count");
  prenex_cmd->add_option("file", file, "Formula file")->required();
  prenex_cmd->add_flag("--json", json, "JSON output");
  prenex_cmd->add_option("--out", out_path, "Write the prenex formula");

  auto* explain_cmd = app.add_subcommand("explain", "Describe a named constructible set");
  explain_cmd->add_option("name", name, "Set name")->required();
  explain_cmd->add_option("--ell", ell, "Cardinality for the membership list")->check(CLI::Range(1, 16));

  auto* golden_cmd = app.add_subcommand("golden", "Compare or rewrite the golden files");
  golden_cmd->add_option("--dir", dir, "Golden directory");
  auto* chk = golden_cmd->add_flag("--check", check, "Compare (default)");
  auto* wr = golden_cmd->add_flag("--write", write, "Rewrite");
  chk->excludes(wr);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*types_cmd) {
      int c = cap ? cap : n;
      auto types = enumerate_types(n, c);
      if (json) {
        nlohmann::ordered_json j;
        j["n"] = n;
        j["cap"] = c;
        j["count"] = types.size();
        std::vector<std::string> rendered;
        for (const auto& t : types) rendered.push_back(render_type(t));
        j["types"] = rendered;
        out << j.dump(2) << "\n";
      } else {
        for (const auto& t : types) out << render_type(t) << "\n";
        err << "count " << types.size() << "\n";
      }
      return 0;
    }

    if (*eval_cmd) {
      Parsed p = parse_formula_file(read_file(file));
      TupleType t;
      try {
        t = parse_type(type_text);
      } catch (const std::exception& e) {
        throw UsageError(std::string("invalid type: ") + e.what());
      }
      if (t.size() != p.free.size())
        throw UsageError("arity mismatch: type has " + std::to_string(t.size()) + " entries, formula has " +
                         std::to_string(p.free.size()) + " free variables");
      out << eval_type(p.formula, p.free, t, ell).str() << "\n";
      return 0;
    }

    if (*derive_cmd) {
      std::size_t rank = 0;
      auto files = derive_files(&rank);
      out << "rank " << rank << "\n";
      out << files["derive/coefficients.json"];
      if (!out_path.empty())
        for (const auto& [rel, text] : files) write_file(fs::path(out_path) / fs::path(rel).filename(), text);
      return rank == 15 ? 0 : 1;
    }

    if (*coeffs_cmd) {
      std::vector<Rational> c = theta2_coefficients();
      if (!coeffs_path.empty()) {
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(read_file(coeffs_path));
        } catch (const nlohmann::json::exception& e) {
          throw UsageError(std::string("invalid coefficient file: ") + e.what());
        }
        c.assign(15, Rational(0));
        for (auto it = j.begin(); it != j.end(); ++it) {
          const std::string& key = it.key();
          int i = 0;
          if (key.rfind("phi", 0) != 0 || (i = std::atoi(key.c_str() + 3)) < 1 || i > 15)
            throw UsageError("unknown coefficient key '" + key + "'");
          c[i - 1] = it->is_string() ? Rational::parse(it->get<std::string>()) : Rational(it->get<std::int64_t>());
        }
      }
      auto v = xyzw();
      auto types = enumerate_types(4, 4);
      bool ok = is_solution(value_matrix(build_basis(v), v, types, 4), d2_target(types), c);
      out << (ok ? "pass" : "fail") << "\n";
      return ok ? 0 : 1;
    }

    if (*build_cmd) {
      Mode mode = parse_mode(mode_text);
      const auto& a = build_theta(n, mode, literal);
      std::string text = format_formula_file(a.formula, a.free);
      if (out_path.empty())
        out << text;
      else
        write_file(out_path, text);
      err << "theta_" << n << " " << mode_name(mode) << " quantifiers " << a.prenex.prefix.size() << " alternations "
          << a.alternations << "\n";
      return 0;
    }

    if (*verify_cmd) {
      if ((n == 0) == formula_path.empty()) throw UsageError("verify needs either n or --formula");
      Strategy strategy;
      if (sample) {
        if (!*sd) throw UsageError("--sample requires --seed");
        strategy = {Strategy::Sample, sample, seed};
      }
      VerificationReport rep;
      int needed = 1;
      if (formula_path.empty()) {
        Mode mode = parse_mode(mode_text);
        rep = verify_theta(build_theta(n, mode, literal), ell, strategy, workers);
        needed = min_ell(mode);
      } else {
        Parsed p = parse_formula_file(read_file(formula_path));
        if (p.free.empty() || p.free.size() % 2)
          throw UsageError("formula must have an even, positive number of free variables");
        rep = verify_formula(p.formula, p.free, ell, strategy, workers);
        if (verify_cmd->count("--mode")) {
          Mode mode = parse_mode(mode_text);
          rep.mode = mode_name(mode);
          needed = min_ell(mode);
        }
        rep.informational = ell < needed;
      }
      if (rep.informational)
        err << "warning: ell = " << ell << " is below " << needed
            << ", the smallest cardinality this construction is claimed for; run is informational\n";
      if (json) {
        out << report_json(rep, timing) << "\n";
      } else {
        out << "n " << rep.n;
        if (!rep.mode.empty()) out << " mode " << rep.mode;
        out << " ell " << rep.ell << " strategy "
            << (strategy.kind == Strategy::Exhaustive ? "exhaustive" : "sample seed " + std::to_string(seed))
            << " types " << rep.types_checked << " mismatches " << rep.mismatches.size() << " alternations "
            << rep.alternations;
        if (timing) out << " elapsed_ms " << static_cast<long long>(rep.elapsed_ms);
        out << "\n";
        for (const auto& m : rep.mismatches)
          out << "  " << render_type(m.type) << " expected " << m.expected << " got " << m.got.str() << "\n";
      }
      if (rep.informational) return 0;
      return rep.mismatches.empty() ? 0 : 1;
    }

    if (*prenex_cmd) {
      Parsed p = parse_formula_file(read_file(file));
      PrenexForm pf = to_prenex(p.formula);
      std::size_t alts = count_alternations(pf);
      if (json) {
        nlohmann::ordered_json j;
        std::vector<std::string> kinds;
        for (const auto& [k, x] : pf.prefix) kinds.push_back(kind_name(k));
        j["prefix"] = kinds;
        nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
        for (const auto& [k, size] : prefix_blocks(pf)) blocks.push_back({{"kind", kind_name(k)}, {"size", size}});
        j["blocks"] = blocks;
        j["quantifiers"] = pf.prefix.size();
        j["alternations"] = alts;
        out << j.dump(2) << "\n";
      } else {
        out << "prefix " << prefix_text(pf) << "\n";
        out << "quantifiers " << pf.prefix.size() << "\n";
        out << "alternations " << alts << "\n";
      }
      if (!out_path.empty()) write_file(out_path, format_formula_file(prenex_formula(pf), p.free));
      return 0;
    }

    if (*explain_cmd) {
      const auto& names = named_set_names();
      if (std::find(names.begin(), names.end(), name) == names.end()) throw UsageError("unknown set '" + name + "'");
      out << explain_json(name, ell) << "\n";
      return 0;
    }

    if (*golden_cmd) {
      auto files = golden_files();
      int status = 0;
      for (const auto& [rel, text] : files) {
        fs::path path = fs::path(dir) / rel;
        if (write) {
          write_file(path, text);
          out << "wrote " << rel << "\n";
          continue;
        }
        if (!fs::exists(path)) {
          out << "missing " << rel << "\n";
          status = 1;
        } else if (read_file(path.string()) != text) {
          out << "differs " << rel << "\n";
          status = 1;
        } else {
          out << "ok " << rel << "\n";
        }
      }
      return status;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const EvalError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormulaError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace affmetric
