#include "affmetric/constructible.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <unordered_set>

#include <json.hpp>

#include "affmetric/evaluator.hpp"
#include "affmetric/sexpr.hpp"

namespace affmetric {

namespace {

Formula d(VarId a, VarId b) { return make_dist(a, b); }

std::vector<VarId> concat(const std::vector<VarId>& a, const std::vector<VarId>& b) {
  std::vector<VarId> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::vector<VarId> union_params(const std::vector<VarId>& a, const std::vector<VarId>& b) {
  std::vector<VarId> out = a;
  for (VarId x : b)
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  return out;
}

std::vector<std::size_t> all_coords(std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i;
  return out;
}

int saturation_cardinality(const Formula& f, std::size_t nvars) {
  return static_cast<int>(nvars + bound_vars(f).size() + 1);
}

void check_scope(const Formula& f, const std::vector<VarId>& allowed, const std::string& what) {
  for (VarId x : f->free_vars())
    if (std::find(allowed.begin(), allowed.end(), x) == allowed.end())
      throw ConstructionError(what + ": free variable '" + var_hint(x) + "' is neither a parameter nor a coordinate");
}

// Calls visit(t) for every type of n variables realizable at ell.
template <typename Visit>
void each_type(std::size_t n, int ell, Visit&& visit) {
  if (n == 0) {
    TupleType empty;
    visit(empty);
    return;
  }
  for_each_type(static_cast<int>(n), std::min<int>(static_cast<int>(n), ell), visit);
}

Formula quantify_fresh(Kind kind, const Formula& f, const std::vector<VarId>& vars) {
  VarMap map;
  std::vector<VarId> fresh;
  for (VarId x : vars) {
    VarId y = fresh_like(x);
    map[x] = y;
    fresh.push_back(y);
  }
  return make_quant_block(kind, fresh, substitute_vars(f, map));
}

Formula min_formula(const Formula& f, const std::vector<VarId>& vars) { return quantify_fresh(Kind::Inf, f, vars); }

std::pair<Rational, bool> gap_for(const Formula& f, const std::vector<VarId>& params, const std::vector<VarId>& vars) {
  if (bell_number(static_cast<int>(params.size() + vars.size())) <= kSpectrumBudget) {
    try {
      return {spectrum_gap(f, params, vars).epsilon, true};
    } catch (const UndefinedGap&) {
      return {Rational(1), true};
    }
  }
  return {Rational(1, denominator_lcm(f)), false};
}

Formula closed_min(const Formula& f, const std::vector<VarId>& params, const std::vector<VarId>& vars) {
  Formula sym = min_formula(f, vars);
  int ell = saturation_cardinality(f, params.size() + vars.size());
  std::vector<Rational> seen;
  each_type(params.size(), ell, [&](const TupleType& t) { seen.push_back(eval_type(sym, params, t, ell)); });
  bool constant = std::all_of(seen.begin(), seen.end(), [&](const Rational& v) { return v == seen.front(); });
  if (constant) return make_const(seen.front());
  return sym;
}

// Checks that inf over vars of f equals expected for every parameter type at
// the listed cardinalities.
bool min_matches(const Formula& f, const std::vector<VarId>& params, const std::vector<VarId>& vars,
                 const Formula& expected, const std::vector<int>& ells) {
  Formula sym = min_formula(f, vars);
  for (int ell : ells) {
    bool ok = true;
    each_type(params.size(), ell, [&](const TupleType& t) {
      if (ok && eval_type(sym, params, t, ell) != eval_type(expected, params, t, ell)) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

ConstructibleSet make_set(const std::string& name, const std::vector<VarId>& params, const std::vector<VarId>& vars,
                          const Formula& f, const Formula& min_value, Rational eps, bool exact) {
  ConstructibleSet s;
  s.name = name;
  s.params = params;
  s.vars = vars;
  s.defining = f;
  Bounds b = bounds(f);
  s.r = b.lo;
  s.s = b.hi;
  s.epsilon = eps;
  s.epsilon_exact = exact;
  s.min_value = min_value;
  s.visible = all_coords(vars.size());
  return s;
}

ConstructibleSet renamed(const ConstructibleSet& a, const std::vector<VarId>& new_vars) {
  return lift(a, new_vars, all_coords(new_vars.size()));
}

ConstructibleSet fresh_copy(const ConstructibleSet& a) {
  std::vector<VarId> vars;
  for (VarId x : a.vars) vars.push_back(fresh_like(x));
  return renamed(a, vars);
}

const std::vector<int> kCheckEll = {3, 4};

}  // namespace

Spectrum spectrum_gap(const Formula& f) { return spectrum_gap(f, {}, f->free_vars()); }

Spectrum spectrum_gap(const Formula& f, const std::vector<VarId>& params, const std::vector<VarId>& vars) {
  std::vector<VarId> all = concat(params, vars);
  if (all.empty()) throw UndefinedGap("constant formula: no free variables, the gap is undefined");
  check_scope(f, all, "spectrum_gap");
  Spectrum out;
  out.ell_sat = saturation_cardinality(f, all.size());
  std::map<TupleType, std::vector<Rational>> groups;
  std::size_t np = params.size();
  for_each_type(static_cast<int>(all.size()), static_cast<int>(all.size()), [&](const TupleType& t) {
    Rational v = eval_type(f, all, t, out.ell_sat);
    groups[TupleType(t.begin(), t.begin() + np)].push_back(v);
    out.values.push_back(v);
  });
  std::sort(out.values.begin(), out.values.end());
  out.values.erase(std::unique(out.values.begin(), out.values.end()), out.values.end());
  out.minimum = out.values.front();
  bool found = false;
  for (auto& [key, vals] : groups) {
    Rational lo = *std::min_element(vals.begin(), vals.end());
    for (const auto& v : vals) {
      if (v == lo) continue;
      Rational gap = v - lo;
      if (!found || gap < out.epsilon) out.epsilon = gap;
      found = true;
    }
  }
  if (!found) throw UndefinedGap("formula takes a single value; the gap is undefined");
  return out;
}

std::vector<VarId> ConstructibleSet::all_vars() const { return concat(params, vars); }

std::vector<VarId> ConstructibleSet::visible_vars() const {
  std::vector<VarId> out = params;
  for (std::size_t i : visible) out.push_back(vars[i]);
  return out;
}

ConstructibleSet argmin_set(const Formula& f, const std::vector<VarId>& vars, const std::vector<VarId>& params,
                            const std::string& name) {
  if (vars.empty()) throw ConstructionError("a constructible set needs at least one coordinate");
  check_scope(f, concat(params, vars), "argmin_set");
  auto [eps, exact] = gap_for(f, params, vars);
  return make_set(name, params, vars, f, closed_min(f, params, vars), eps, exact);
}

ConstructibleSet argmin_set_with_min(const Formula& f, const std::vector<VarId>& vars,
                                     const std::vector<VarId>& params, const Formula& min_value,
                                     const std::string& name) {
  check_scope(f, concat(params, vars), "argmin_set");
  check_scope(min_value, params, "argmin_set minimum");
  int sat = saturation_cardinality(f, params.size() + vars.size());
  if (!min_matches(f, params, vars, min_value, {3, 4, sat}))
    throw ConstructionError("closed-form minimum of " + (name.empty() ? std::string("set") : name) +
                            " disagrees with the infimum");
  auto [eps, exact] = gap_for(f, params, vars);
  return make_set(name, params, vars, f, min_value, eps, exact);
}

Formula symbolic_min(const ConstructibleSet& a) { return min_formula(a.defining, a.vars); }

bool is_member(const ConstructibleSet& a, const TupleType& t, int ell) {
  auto all = a.all_vars();
  if (t.size() != all.size()) throw ConstructionError("type length differs from the set's variable count");
  TupleType pt(t.begin(), t.begin() + a.params.size());
  Rational m = eval_type(symbolic_min(a), a.params, pt, ell);
  return eval_type(a.defining, all, t, ell) == m;
}

std::vector<TupleType> membership(const ConstructibleSet& a, int ell) {
  std::vector<VarId> hidden;
  for (std::size_t i = 0; i < a.vars.size(); ++i)
    if (std::find(a.visible.begin(), a.visible.end(), i) == a.visible.end()) hidden.push_back(a.vars[i]);
  Formula g = quantify_fresh(Kind::Inf, a.defining, hidden);
  Formula m = symbolic_min(a);
  auto vis = a.visible_vars();
  std::vector<TupleType> out;
  each_type(vis.size(), ell, [&](const TupleType& t) {
    TupleType pt(t.begin(), t.begin() + a.params.size());
    if (eval_type(g, vis, t, ell) == eval_type(m, a.params, pt, ell)) out.push_back(t);
  });
  return out;
}

Rational transform_constant(const ConstructibleSet& a, const Formula& phi) {
  Bounds b = bounds(phi);
  return (b.hi - b.lo) / a.epsilon + 1;
}

namespace {
Formula over(const ConstructibleSet& a, const Formula& phi, bool simplified, Kind kind) {
  Rational k = transform_constant(a, phi);
  Formula inner = simplified ? a.min_value : symbolic_min(a);
  Rational sign = kind == Kind::Inf ? Rational(1) : Rational(-1);
  Formula body = make_affine(0, {{sign * k, a.defining}, {-sign * k, inner}, {1, phi}});
  return refresh_bound(make_quant_block(kind, a.vars, body));
}
}  // namespace

Formula inf_over(const ConstructibleSet& a, const Formula& phi, bool simplified) {
  return over(a, phi, simplified, Kind::Inf);
}

Formula sup_over(const ConstructibleSet& a, const Formula& phi, bool simplified) {
  return over(a, phi, simplified, Kind::Sup);
}

ConstructibleSet lift(const ConstructibleSet& a, const std::vector<VarId>& new_vars,
                      const std::vector<std::size_t>& coords) {
  if (coords.size() != a.vars.size()) throw ConstructionError("lift: coordinate count differs from the set's dimension");
  VarMap map;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] >= new_vars.size()) throw ConstructionError("lift: coordinate out of range");
    map[a.vars[i]] = new_vars[coords[i]];
  }
  for (VarId p : a.params)
    if (std::find(new_vars.begin(), new_vars.end(), p) != new_vars.end())
      throw ConstructionError("lift: target coordinates overlap the set's parameters");
  ConstructibleSet out = a;
  out.name.clear();
  out.vars = new_vars;
  out.defining = substitute_vars(a.defining, map);
  out.visible = all_coords(new_vars.size());
  out.constants.clear();
  return out;
}

ConstructibleSet product(const ConstructibleSet& a, const ConstructibleSet& b) {
  bool overlap = std::any_of(b.vars.begin(), b.vars.end(), [&](VarId x) {
    return std::find(a.vars.begin(), a.vars.end(), x) != a.vars.end() ||
           std::find(a.params.begin(), a.params.end(), x) != a.params.end();
  });
  ConstructibleSet bb = overlap ? fresh_copy(b) : b;
  ConstructibleSet out =
      make_set("", union_params(a.params, bb.params), concat(a.vars, bb.vars), add(a.defining, bb.defining),
               add(a.min_value, bb.min_value), std::min(a.epsilon, bb.epsilon), false);
  return out;
}

ConstructibleSet intersect(const ConstructibleSet& a, const ConstructibleSet& b) {
  if (a.is_projected() || b.is_projected()) {
    if (a.visible.size() != b.visible.size()) throw ConstructionError("intersect: dimensions differ");
    // shared visible coordinates, separate witnesses
    std::vector<VarId> vars = a.vars;
    std::vector<std::size_t> coords(b.vars.size());
    for (std::size_t i = 0; i < b.vars.size(); ++i) {
      auto it = std::find(b.visible.begin(), b.visible.end(), i);
      if (it != b.visible.end()) {
        coords[i] = a.visible[it - b.visible.begin()];
      } else {
        coords[i] = vars.size();
        vars.push_back(fresh_var(var_hint(b.vars[i])));
      }
    }
    ConstructibleSet out = intersect(lift(a, vars, all_coords(a.vars.size())), lift(b, vars, coords));
    out.visible = a.visible;
    return out;
  }
  if (a.vars.size() != b.vars.size()) throw ConstructionError("intersect: dimensions differ");
  ConstructibleSet bb = renamed(b, a.vars);
  auto params = union_params(a.params, bb.params);
  Formula f = add(a.defining, bb.defining);
  Formula m = add(a.min_value, bb.min_value);
  if (!min_matches(f, params, a.vars, m, kCheckEll)) throw ConstructionError("intersect: the intersection is empty");
  ConstructibleSet out = make_set("", params, a.vars, f, m, std::min(a.epsilon, bb.epsilon), false);
  out.visible = a.visible;
  return out;
}

ConstructibleSet restrict_argmin(const ConstructibleSet& b, const Formula& f, const std::string& name) {
  Bounds fb = bounds(f);
  Rational k = (fb.hi - fb.lo) / b.epsilon + 1;
  Formula g = make_affine(0, {{k, b.defining}, {-k, b.min_value}, {1, f}});
  std::vector<VarId> params = b.params;
  for (VarId x : f->free_vars())
    if (std::find(b.vars.begin(), b.vars.end(), x) == b.vars.end() &&
        std::find(params.begin(), params.end(), x) == params.end())
      params.push_back(x);
  ConstructibleSet out = argmin_set(g, b.vars, params, name);
  out.constants.emplace_back("K", k);
  return out;
}

ConstructibleSet comprehend(const ConstructibleSet& a, const std::vector<std::size_t>& coords,
                            const ConstructibleSet& b) {
  ConstructibleSet lb = lift(b, a.vars, coords);
  auto params = union_params(a.params, lb.params);
  if (!min_matches(add(a.defining, lb.defining), params, a.vars, add(a.min_value, lb.min_value), kCheckEll))
    throw ConstructionError("comprehend: no member of the set satisfies the condition");
  lb.params = params;
  ConstructibleSet out = restrict_argmin(lb, a.defining, a.name);
  out.visible = a.visible;
  return out;
}

ConstructibleSet parameterize(const ConstructibleSet& a, std::size_t k) {
  if (k == 0 || k >= a.vars.size()) throw ConstructionError("parameterize: prefix must be a proper, non-empty prefix");
  std::vector<VarId> params = a.params;
  params.insert(params.end(), a.vars.begin(), a.vars.begin() + k);
  std::vector<VarId> vars(a.vars.begin() + k, a.vars.end());
  ConstructibleSet out = argmin_set(a.defining, vars, params, a.name);
  out.visible.clear();
  for (std::size_t i : a.visible)
    if (i >= k) out.visible.push_back(i - k);
  return out;
}

ConstructibleSet project(const ConstructibleSet& a, const std::vector<std::size_t>& coords) {
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] >= a.vars.size()) throw ConstructionError("project: coordinate out of range");
    if (i && coords[i] <= coords[i - 1]) throw ConstructionError("project: coordinates must increase");
  }
  ConstructibleSet out = a;
  out.visible = coords;
  return out;
}

Formula project_quantify(const ConstructibleSet& a, const std::vector<std::size_t>& coords, const Formula& phi,
                         Kind kind, bool simplified) {
  for (VarId x : phi->free_vars()) {
    auto it = std::find(a.vars.begin(), a.vars.end(), x);
    if (it == a.vars.end()) continue;
    std::size_t i = static_cast<std::size_t>(it - a.vars.begin());
    if (std::find(coords.begin(), coords.end(), i) == coords.end())
      throw ConstructionError("project_quantify: formula uses a coordinate outside the projection");
  }
  return kind == Kind::Inf ? inf_over(a, phi, simplified) : sup_over(a, phi, simplified);
}

Formula card3(VarId p, VarId q, VarId r) {
  VarId x = fresh_var("x");
  return make_inf(x, make_affine(1, {{1, d(p, x)}, {1, d(q, x)}, {1, d(r, x)}}));
}

Formula card4(VarId p, VarId q, VarId r, VarId s) {
  VarId x = fresh_var("x");
  Formula extra = make_sup(x, make_affine(-2, {{1, d(p, x)}, {1, d(q, x)}, {1, d(r, x)}, {-1, d(s, x)}}));
  return add(card3(p, q, r), extra);
}

namespace {
// U(p, q, z) = d(p,z) + d(q,z) - d(p,q): zero exactly when z is p or q.
Formula u_form(VarId p, VarId q, VarId z) { return make_affine(0, {{1, d(p, z)}, {1, d(q, z)}, {-1, d(p, q)}}); }
}  // namespace

ConstructibleSet union1(const ConstructibleSet& a, const ConstructibleSet& b) {
  if (a.dim() != 1 || b.dim() != 1) throw ConstructionError("union1: both sets must have dimension 1");
  VarId ua = fresh_var("u"), ub = fresh_var("v"), x = fresh_var("x");
  ConstructibleSet la = renamed(a, {ua});
  ConstructibleSet lb = renamed(b, {ub});
  Formula f = sum({la.defining, lb.defining, u_form(ua, ub, x)});
  ConstructibleSet out = make_set("", union_params(a.params, b.params), {ua, ub, x}, f, add(a.min_value, b.min_value),
                                  std::min({a.epsilon, b.epsilon, Rational(1)}), false);
  out.visible = {2};
  return out;
}

ConstructibleSet complement1(const ConstructibleSet& a) {
  if (a.dim() != 1) throw ConstructionError("complement1: the set must have dimension 1");
  VarId x = fresh_var("x");
  Formula dist_to_a = inf_over(a, d(x, a.vars[0]));
  Formula f = scale(-1, dist_to_a);
  ConstructibleSet out = argmin_set(f, {x}, a.params);
  Formula m = symbolic_min(out);
  for (int ell : kCheckEll) {
    each_type(a.params.size(), ell, [&](const TupleType& t) {
      if (eval_type(m, a.params, t, ell) != Rational(-1))
        throw ConstructionError("complement1: the set is the whole space, its complement is empty");
    });
  }
  out.min_value = make_const(-1);
  return out;
}

ConstructibleSet restricted_union(const ConstructibleSet& p, const ConstructibleSet& q) {
  std::size_t n = p.dim();
  if (n < 2 || q.dim() != n) throw ConstructionError("restricted_union: sets must share a dimension above 1");
  VarId a = fresh_var("a");
  std::vector<VarId> xs;
  for (std::size_t i = 1; i < n; ++i) xs.push_back(fresh_var("x" + std::to_string(i)));
  VarId b = fresh_var("b"), c = fresh_var("c");
  std::vector<VarId> pb = {b}, qc = {c};
  pb.insert(pb.end(), xs.begin(), xs.end());
  qc.insert(qc.end(), xs.begin(), xs.end());
  ConstructibleSet lp = renamed(p, pb);
  ConstructibleSet lq = renamed(q, qc);
  auto params = union_params(p.params, q.params);
  auto section_params = concat(params, xs);
  if (!min_matches(lp.defining, section_params, {b}, lp.min_value, kCheckEll) ||
      !min_matches(lq.defining, section_params, {c}, lq.min_value, kCheckEll))
    throw ConstructionError("restricted_union: some section of P or Q is empty");
  std::vector<VarId> vars = {a};
  vars.insert(vars.end(), xs.begin(), xs.end());
  vars.push_back(b);
  vars.push_back(c);
  Formula f = sum({lp.defining, lq.defining, u_form(b, c, a)});
  ConstructibleSet out = make_set("", params, vars, f, add(p.min_value, q.min_value),
                                  std::min({p.epsilon, q.epsilon, Rational(1)}), false);
  out.visible = all_coords(n);
  return out;
}

namespace {
Formula dn_instance(const Formula& theta, const std::vector<VarId>& free, const std::vector<VarId>& u,
                    const std::vector<VarId>& v) {
  VarMap map;
  std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i) {
    map[free[i]] = u[i];
    map[free[n + i]] = v[i];
  }
  return substitute_vars(theta, map);
}
}  // namespace

ConstructibleSet u_n(const Formula& theta_n, const std::vector<VarId>& theta_free) {
  if (theta_free.size() < 2 || theta_free.size() % 2) throw ConstructionError("u_n: d_n needs 2n variables");
  int n = static_cast<int>(theta_free.size() / 2);
  auto a = fresh_vars("a", n), b = fresh_vars("b", n), c = fresh_vars("c", n);
  Formula f = make_affine(0, {{1, dn_instance(theta_n, theta_free, a, c)},
                              {1, dn_instance(theta_n, theta_free, b, c)},
                              {-1, dn_instance(theta_n, theta_free, a, b)}});
  auto vars = concat(concat(a, b), c);
  return argmin_set(f, vars, {}, "U" + std::to_string(n));
}

ConstructibleSet union_n(const ConstructibleSet& a, const ConstructibleSet& b, const Formula& theta_n,
                         const std::vector<VarId>& theta_free) {
  std::size_t n = a.dim();
  if (b.dim() != n || theta_free.size() != 2 * n) throw ConstructionError("union_n: dimension mismatch");
  ConstructibleSet un = u_n(theta_n, theta_free);
  std::vector<VarId> av(un.vars.begin(), un.vars.begin() + n);
  std::vector<VarId> bv(un.vars.begin() + n, un.vars.begin() + 2 * n);
  ConstructibleSet la = renamed(a, av);
  ConstructibleSet lb = renamed(b, bv);
  Formula f = sum({la.defining, lb.defining, un.defining});
  Formula m = sum({a.min_value, b.min_value, un.min_value});
  ConstructibleSet out = make_set("", union_params(a.params, b.params), un.vars, f, m,
                                  std::min({a.epsilon, b.epsilon, un.epsilon}), false);
  out.visible.clear();
  for (std::size_t i = 2 * n; i < 3 * n; ++i) out.visible.push_back(i);
  return out;
}

const std::vector<std::string>& named_set_names() {
  static const std::vector<std::string> names = {"Delta", "BarDelta", "U",  "Pair", "C_le2", "A1",
                                                 "A2",    "B",        "A3", "X",    "Xprime"};
  return names;
}

namespace {

void expect_min(const ConstructibleSet& s, const Rational& expected) {
  if (s.min_value->kind() != Kind::Const || s.min_value->value() != expected)
    throw ConstructionError("minimum of " + s.name + " is " + serialize(s.min_value) + ", expected " + expected.str());
}

ConstructibleSet build_uncached(const std::string& name) {
  if (name == "Delta") {
    VarId a = fresh_var("a"), b = fresh_var("b");
    auto s = argmin_set(d(a, b), {a, b}, {}, name);
    expect_min(s, 0);
    return s;
  }
  if (name == "BarDelta") {
    VarId a = fresh_var("a"), b = fresh_var("b");
    auto s = argmin_set(scale(-1, d(a, b)), {a, b}, {}, name);
    expect_min(s, -1);
    return s;
  }
  if (name == "U") {
    VarId a = fresh_var("a"), b = fresh_var("b"), c = fresh_var("c");
    auto s = argmin_set(u_form(a, b, c), {a, b, c}, {}, name);
    expect_min(s, 0);
    return s;
  }
  if (name == "Pair") {
    VarId a = fresh_var("a"), b = fresh_var("b"), x = fresh_var("x");
    return argmin_set_with_min(add(d(a, x), d(b, x)), {x}, {a, b}, d(a, b), name);
  }
  if (name == "C_le2") {
    std::vector<VarId> v = {fresh_var("a"), fresh_var("b"), fresh_var("c"), fresh_var("d")};
    ConstructibleSet apart = lift(build_named("BarDelta"), v, {2, 3});
    auto s = restrict_argmin(apart, card4(v[0], v[2], v[1], v[3]), name);
    s.constants = {{"K1", s.constants.at(0).second}, {"inner_inf", build_named("BarDelta").min_value->value()}};
    s.visible = {0, 1, 2};
    expect_min(s, 2);
    return s;
  }
  if (name == "A1" || name == "A2") {
    std::vector<VarId> v = {fresh_var("a"), fresh_var("b"), fresh_var("c"),
                            fresh_var("d"), fresh_var("e"), fresh_var("f")};
    const auto& cle2 = build_named("C_le2");
    const auto& u = build_named("U");
    ConstructibleSet s = name == "A1" ? intersect(lift(cle2, v, {0, 2, 4, 5}), lift(u, v, {3, 4, 1}))
                                      : intersect(lift(cle2, v, {1, 3, 4, 5}), lift(u, v, {0, 4, 2}));
    s.name = name;
    s.visible = {0, 1, 2, 3};
    expect_min(s, 2);
    return s;
  }
  if (name == "B") {
    std::vector<VarId> v = {fresh_var("a"), fresh_var("b"), fresh_var("c"), fresh_var("d"), fresh_var("e")};
    Formula apart = make_affine(0, {{-1, d(v[2], v[3])}, {-1, d(v[0], v[4])}, {-1, d(v[0], v[3])}, {-1, d(v[2], v[4])}});
    ConstructibleSet constraint = argmin_set(apart, v, {}, "");
    Formula pairs = make_affine(0, {{1, d(v[1], v[0])}, {1, d(v[1], v[3])}, {1, d(v[1], v[2])}, {1, d(v[1], v[4])}});
    auto s = restrict_argmin(constraint, pairs, name);
    s.constants = {{"K2", s.constants.at(0).second}};
    s.visible = {0, 1, 2};
    expect_min(s, 2);
    return s;
  }
  if (name == "A3") {
    std::vector<VarId> v = {fresh_var("a"), fresh_var("b"), fresh_var("c"), fresh_var("d"),
                            fresh_var("e"), fresh_var("f"), fresh_var("g")};
    auto s = intersect(lift(build_named("B"), v, {1, 4, 3, 5, 6}), lift(build_named("U"), v, {0, 4, 2}));
    s.name = name;
    s.visible = {0, 1, 2, 3};
    expect_min(s, 2);
    return s;
  }
  if (name == "X") {
    std::vector<VarId> v = {fresh_var("a"), fresh_var("b"), fresh_var("c"), fresh_var("d")};
    auto e = fresh_vars("e", 7);
    v.insert(v.end(), e.begin(), e.end());
    auto s = intersect(lift(build_named("A1"), v, {0, 1, 2, 3, 4, 5}), lift(build_named("A2"), v, {0, 1, 2, 3, 6, 7}));
    s = intersect(s, lift(build_named("A3"), v, {0, 1, 2, 3, 8, 9, 10}));
    s.name = name;
    s.visible = {0, 1, 2, 3};
    expect_min(s, 6);
    return s;
  }
  if (name == "Xprime") {
    const auto& x_set = build_named("X");
    std::vector<VarId> v = {x_set.vars[0], x_set.vars[1], fresh_var("x"), fresh_var("y")};
    v.insert(v.end(), x_set.vars.begin() + 4, x_set.vars.end());
    ConstructibleSet xp = parameterize(renamed(x_set, v), 2);
    VarId a = v[0], b = v[1], c = fresh_var("c"), dd = fresh_var("d");
    VarId x = v[2], y = v[3];
    auto pair_ac = argmin_set_with_min(add(d(a, x), d(c, x)), {x}, {a, c}, d(a, c));
    auto pair_bd = argmin_set_with_min(add(d(b, y), d(dd, y)), {y}, {b, dd}, d(b, dd));
    xp = intersect(xp, lift(pair_ac, xp.vars, {0}));
    xp = intersect(xp, lift(pair_bd, xp.vars, {1}));
    xp.name = name;
    xp.visible = {0, 1};
    Formula phi = add(d(a, x), d(b, y));
    xp.constants = {{"K0", transform_constant(xp, phi)}};
    return xp;
  }
  throw ConstructionError("unknown set '" + name + "'");
}

}  // namespace

const ConstructibleSet& build_named(const std::string& name) {
  static std::recursive_mutex mu;
  static std::map<std::string, ConstructibleSet> cache;
  std::lock_guard<std::recursive_mutex> lock(mu);
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  ConstructibleSet s = build_uncached(name);
  return cache.emplace(name, std::move(s)).first->second;
}

ElementaryTheta2 elementary_theta2(bool literal) {
  const auto& xp = build_named("Xprime");
  VarId a = xp.params[0], b = xp.params[1];
  VarId x = xp.vars[0], y = xp.vars[1];
  Formula phi = add(d(a, x), d(b, y));
  ElementaryTheta2 out;
  out.k0 = transform_constant(xp, phi);
  out.formula = sup_over(xp, phi, !literal);
  out.free = xp.params;
  return out;
}

std::string explain_json(const std::string& name, int ell) {
  const auto& s = build_named(name);
  nlohmann::ordered_json j;
  auto names = [](const std::vector<VarId>& vs) {
    std::vector<std::string> out;
    for (VarId v : vs) out.push_back(var_hint(v));
    return out;
  };
  j["name"] = s.name;
  j["dim"] = s.dim();
  j["params"] = names(s.params);
  j["vars"] = names(s.vars);
  j["visible"] = names(s.visible_vars());
  j["formula"] = serialize(s.defining);
  j["r"] = s.r.str();
  j["s"] = s.s.str();
  j["epsilon"] = s.epsilon.str();
  j["epsilon_exact"] = s.epsilon_exact;
  nlohmann::ordered_json k = nlohmann::ordered_json::object();
  for (const auto& [key, value] : s.constants) k[key] = value.str();
  j["constants"] = k;
  j["min_value"] = s.min_value->kind() == Kind::Const ? s.min_value->value().str() : serialize(s.min_value);
  j["ell"] = ell;
  std::vector<std::string> members;
  for (const auto& t : membership(s, ell)) members.push_back(render_type(t));
  j["membership"] = members;
  return j.dump(2);
}

}  // namespace affmetric
