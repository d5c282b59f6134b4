#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "affmetric/rational.hpp"

namespace affmetric {

using VarId = std::uint32_t;

// Allocates a globally unique variable id. The hint is the preferred display
// name used by the serializer.
VarId fresh_var(const std::string& hint);
VarId fresh_like(VarId v);
const std::string& var_hint(VarId v);
std::vector<VarId> fresh_vars(const std::string& prefix, int count, int first_index = 1);

enum class Kind : std::uint8_t { Const, Dist, Affine, Inf, Sup };

inline bool is_quantifier(Kind k) { return k == Kind::Inf || k == Kind::Sup; }
inline Kind dual(Kind k) { return k == Kind::Inf ? Kind::Sup : Kind::Inf; }
const char* kind_name(Kind k);

class Node;
using Formula = std::shared_ptr<const Node>;

struct Term {
  Rational coef;
  Formula sub;
};

// Immutable formula node. Construct through the make_* functions, which keep
// Affine nodes canonical (flat, no zero coefficients, no Const children).
class Node {
 public:
  Kind kind() const { return kind_; }
  // Const value, or the constant of an Affine node.
  const Rational& value() const { return value_; }
  VarId u() const { return u_; }
  VarId v() const { return v_; }
  VarId bound() const { return u_; }
  const Formula& body() const { return body_; }
  const std::vector<Term>& terms() const { return terms_; }

  // Free variables in order of first occurrence.
  const std::vector<VarId>& free_vars() const { return free_; }
  bool has_free(VarId x) const;
  // Alpha-equivalence class id: equal shapes evaluate identically once free
  // variables are matched positionally.
  std::uint32_t shape() const { return shape_; }
  // Evaluation at cardinality ell equals evaluation at min(ell, saturation()).
  int saturation() const { return saturation_; }
  std::size_t quantifier_count() const { return quantifiers_; }
  std::size_t size() const { return size_; }
  // For Affine: per term, positions of the term's free variables in free_vars().
  // For Inf/Sup: positions of the body's free variables in free_vars() with the
  // bound variable at index free_vars().size().
  const std::vector<std::vector<std::uint16_t>>& child_positions() const { return positions_; }

 private:
  friend struct NodeFactory;
  Node() = default;

  Kind kind_ = Kind::Const;
  Rational value_;
  VarId u_ = 0;
  VarId v_ = 0;
  Formula body_;
  std::vector<Term> terms_;
  std::vector<VarId> free_;
  std::vector<std::vector<std::uint16_t>> positions_;
  std::uint32_t shape_ = 0;
  int saturation_ = 1;
  std::size_t quantifiers_ = 0;
  std::size_t size_ = 1;
};

Formula make_const(const Rational& c);
Formula make_dist(VarId a, VarId b);
Formula make_affine(const Rational& constant, std::vector<Term> terms);
// Drops the binder when x does not occur free in body.
Formula make_quant(Kind kind, VarId x, const Formula& body);
Formula make_inf(VarId x, const Formula& body);
Formula make_sup(VarId x, const Formula& body);
// Nested quantifiers, vars[0] outermost.
Formula make_quant_block(Kind kind, const std::vector<VarId>& vars, const Formula& body);

// Small affine builders.
Formula sum(const std::vector<Formula>& fs);
Formula scale(const Rational& k, const Formula& f);
Formula add(const Formula& a, const Formula& b);
Formula sub(const Formula& a, const Formula& b);
Formula add_const(const Formula& f, const Rational& c);

bool alpha_equal(const Formula& a, const Formula& b);

using VarMap = std::unordered_map<VarId, VarId>;

// Capture-avoiding renaming of free variables; every binder is refreshed.
// Variables absent from the mapping are left unchanged.
Formula substitute_vars(const Formula& f, const VarMap& mapping);
// Same formula with every binder replaced by a fresh variable.
Formula refresh_bound(const Formula& f);

// Replaces every variable of f by a tuple of variables and every Dist(u,v)
// by the template instantiated at tuple(u) ++ tuple(v). Quantifiers become
// same-kind blocks over fresh tuples. template_free lists the 2m
// distinguished variables of the template.
Formula replace_metric(const Formula& f, const Formula& tmpl, const std::vector<VarId>& template_free,
                       const std::unordered_map<VarId, std::vector<VarId>>& tuples);

// Distributes coefficients into quantifiers so every quantifier child of an
// Affine node has coefficient +1.
Formula scale_flatten(const Formula& f);

// Narrows quantifier scopes: terms not mentioning a block's variables are
// moved out, and each block is split into independent components.
Formula miniscope(const Formula& f);

struct Bounds {
  Rational lo;
  Rational hi;
};
// Interval bounds with Dist in [0,1], sound for every cardinality.
Bounds bounds(const Formula& f);

// Least common multiple of every denominator in f.
std::int64_t denominator_lcm(const Formula& f);

// Bound variables in binding order (pre-order).
std::vector<VarId> bound_vars(const Formula& f);

class FormulaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace affmetric
