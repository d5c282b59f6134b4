#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "affmetric/formula.hpp"
#include "affmetric/prenex.hpp"
#include "affmetric/types.hpp"

namespace affmetric {

enum class Mode { Algorithmic, Elementary };

const char* mode_name(Mode m);
// Accepts "algorithmic" / "elementary"; throws std::invalid_argument.
Mode parse_mode(const std::string& text);
// Smallest cardinality at which the mode's construction equals d_n.
int min_ell(Mode m);

// A formula for d_n with its free variables listed as (a_1..a_n, b_1..b_n).
struct ThetaFormula {
  Formula formula;
  std::vector<VarId> free;
  int n() const { return static_cast<int>(free.size() / 2); }
};

// Seed used by doubling: the affine combination for algorithmic mode, the
// simplified sup over Xprime for elementary mode.
ThetaFormula theta2_seed(Mode m);

// Replaces each variable of theta2 by an m-tuple and each distance by theta_m.
ThetaFormula double_theta(const ThetaFormula& theta_m, const ThetaFormula& theta2);

// theta_n from theta_{2^k} by repeating a_1 in the unused slots.
ThetaFormula pad(const ThetaFormula& theta_pow, int n);

struct ThetaArtifact {
  int n = 2;
  Mode mode = Mode::Algorithmic;
  bool literal = false;
  Formula formula;
  // a1..an, b1..bn, also the formula's first-occurrence order.
  std::vector<VarId> free;
  PrenexForm prenex;
  std::size_t alternations = 0;
  int min_ell = 2;
};

// n >= 2. literal keeps the symbolic inner infimum in elementary mode.
// Results are cached.
const ThetaArtifact& build_theta(int n, Mode mode, bool literal = false);

struct Strategy {
  enum Kind { Exhaustive, Sample } kind = Exhaustive;
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
};

struct Mismatch {
  TupleType type;
  int expected = 0;
  Rational got;
};

struct VerificationReport {
  int n = 0;
  std::string mode;  // empty for a formula read from a file
  int ell = 0;
  Strategy strategy;
  std::uint64_t types_checked = 0;
  std::vector<Mismatch> mismatches;  // sorted by type
  std::size_t alternations = 0;
  bool informational = false;  // ell below the construction's minimum
  double elapsed_ms = 0;
};

// Types of 2n-tuples checked under the strategy: all types realizable at ell,
// or distinct canonicalized draws of uniform labels from a seeded mt19937_64.
std::vector<TupleType> choose_types(int n, int ell, const Strategy& strategy);

// Compares f against d_n on the chosen types. workers = 0 uses every core.
VerificationReport verify_formula(const Formula& f, const std::vector<VarId>& free, int ell,
                                  const Strategy& strategy, unsigned workers = 0);
VerificationReport verify_theta(const ThetaArtifact& artifact, int ell, const Strategy& strategy,
                                unsigned workers = 0);

// elapsed_ms is included only when timing is set, keeping reports byte-stable.
std::string report_json(const VerificationReport& report, bool timing = false);

}  // namespace affmetric
