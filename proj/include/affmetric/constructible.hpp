#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "affmetric/formula.hpp"
#include "affmetric/types.hpp"

namespace affmetric {

class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by spectrum_gap when the formula takes a single value.
class UndefinedGap : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Spectrum {
  std::vector<Rational> values;  // sorted
  Rational minimum;
  Rational epsilon;
  int ell_sat = 1;
};

// Exact value set of f over every type of its free variables, evaluated at
// ell_sat = (free + bound variables) + 1.
Spectrum spectrum_gap(const Formula& f);
// Same, over the listed variables; with params, the gap is measured from the
// minimum within each parameter type.
Spectrum spectrum_gap(const Formula& f, const std::vector<VarId>& params, const std::vector<VarId>& vars);

// Exhaustive gap computation is used while Bell(|params| + |vars|) stays
// within this budget; beyond it the lattice bound 1/lcm(denominators) is used.
inline constexpr std::uint64_t kSpectrumBudget = 200'000;

struct ConstructibleSet {
  std::string name;
  std::vector<VarId> params;
  std::vector<VarId> vars;
  Formula defining;
  Rational r;
  Rational s;
  Rational epsilon;
  bool epsilon_exact = true;
  // Infimum of defining over vars, as a formula over params.
  Formula min_value;
  // Coordinates kept when the set is read as a projection.
  std::vector<std::size_t> visible;
  std::vector<std::pair<std::string, Rational>> constants;

  std::size_t dim() const { return vars.size(); }
  // params followed by vars.
  std::vector<VarId> all_vars() const;
  // params followed by the visible vars.
  std::vector<VarId> visible_vars() const;
  bool is_projected() const { return visible.size() != vars.size(); }
};

ConstructibleSet argmin_set(const Formula& f, const std::vector<VarId>& vars, const std::vector<VarId>& params = {},
                            const std::string& name = "");
// As argmin_set, with a closed form for the minimum that is checked against
// the symbolic infimum on every parameter type.
ConstructibleSet argmin_set_with_min(const Formula& f, const std::vector<VarId>& vars,
                                     const std::vector<VarId>& params, const Formula& min_value,
                                     const std::string& name = "");

// inf over fresh copies of the set's variables of its defining formula.
Formula symbolic_min(const ConstructibleSet& a);

// Membership of a type over params ++ vars at cardinality ell.
bool is_member(const ConstructibleSet& a, const TupleType& t, int ell);
// Types over params ++ visible vars that extend to a member, at ell.
std::vector<TupleType> membership(const ConstructibleSet& a, int ell);

// K = (s - r) / epsilon + 1 with (r, s) the bounds of phi.
Rational transform_constant(const ConstructibleSet& a, const Formula& phi);
// inf (resp. sup) of phi over the members of a, as one formula. simplified
// replaces the inner infimum by a.min_value.
Formula inf_over(const ConstructibleSet& a, const Formula& phi, bool simplified = true);
Formula sup_over(const ConstructibleSet& a, const Formula& phi, bool simplified = true);

// Set over new_vars whose coordinates at positions coords satisfy a; the
// other coordinates are unconstrained.
ConstructibleSet lift(const ConstructibleSet& a, const std::vector<VarId>& new_vars,
                      const std::vector<std::size_t>& coords);
ConstructibleSet product(const ConstructibleSet& a, const ConstructibleSet& b);
// b's variables are identified positionally with a's.
ConstructibleSet intersect(const ConstructibleSet& a, const ConstructibleSet& b);
// Members of b minimizing f.
ConstructibleSet restrict_argmin(const ConstructibleSet& b, const Formula& f, const std::string& name = "");
// Members of a whose coordinates at coords belong to b.
ConstructibleSet comprehend(const ConstructibleSet& a, const std::vector<std::size_t>& coords,
                            const ConstructibleSet& b);
// The first k variables become parameters.
ConstructibleSet parameterize(const ConstructibleSet& a, std::size_t k);
// Marks a projection onto coords; nothing is materialized.
ConstructibleSet project(const ConstructibleSet& a, const std::vector<std::size_t>& coords);
// inf/sup of phi over the projection of a onto coords.
Formula project_quantify(const ConstructibleSet& a, const std::vector<std::size_t>& coords, const Formula& phi,
                         Kind kind, bool simplified = true);

Formula card3(VarId p, VarId q, VarId r);
Formula card4(VarId p, VarId q, VarId r, VarId s);

ConstructibleSet union1(const ConstructibleSet& a, const ConstructibleSet& b);
ConstructibleSet complement1(const ConstructibleSet& a);
ConstructibleSet restricted_union(const ConstructibleSet& p, const ConstructibleSet& q);
// {(a, b, c) in M^{3n} | c in {a, b}} from a formula for d_n over
// (a_1..a_n, b_1..b_n).
ConstructibleSet u_n(const Formula& theta_n, const std::vector<VarId>& theta_free);
ConstructibleSet union_n(const ConstructibleSet& a, const ConstructibleSet& b, const Formula& theta_n,
                         const std::vector<VarId>& theta_free);

const std::vector<std::string>& named_set_names();
// Delta, BarDelta, U, Pair, C_le2, A1, A2, B, A3, X, Xprime. Cached.
const ConstructibleSet& build_named(const std::string& name);

struct ElementaryTheta2 {
  Formula formula;
  std::vector<VarId> free;  // a, b, c, d
  Rational k0;
};
// d2 as sup over Xprime of d(a,x) + d(b,y).
ElementaryTheta2 elementary_theta2(bool literal = false);

// JSON description of a named set with its membership at ell.
std::string explain_json(const std::string& name, int ell);

}  // namespace affmetric
