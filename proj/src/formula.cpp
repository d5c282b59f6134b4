#include "affmetric/formula.hpp"

#include <algorithm>
#include <cstring>
#include <deque>
#include <mutex>
#include <numeric>
#include <unordered_set>

namespace affmetric {

namespace {

struct VarRegistry {
  std::mutex mu;
  std::deque<std::string> hints;
};

VarRegistry& registry() {
  static VarRegistry r;
  return r;
}

struct ShapeTable {
  std::mutex mu;
  std::unordered_map<std::string, std::uint32_t> ids;
};

ShapeTable& shapes() {
  static ShapeTable t;
  return t;
}

template <typename T>
void put(std::string& key, const T& value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  key.append(buf, sizeof(T));
}

void put_rational(std::string& key, const Rational& r) {
  put(key, r.num());
  put(key, r.den());
}

std::uint32_t intern(const std::string& key) {
  auto& t = shapes();
  std::lock_guard<std::mutex> lock(t.mu);
  auto [it, inserted] = t.ids.emplace(key, static_cast<std::uint32_t>(t.ids.size()));
  return it->second;
}

std::size_t sat_add(std::size_t a, std::size_t b) {
  std::size_t r = a + b;
  return r < a ? SIZE_MAX : r;
}

// Index of each variable in an ordered list, built lazily for long lists.
class PositionIndex {
 public:
  explicit PositionIndex(const std::vector<VarId>& vars) : vars_(vars) {
    if (vars.size() > 16) {
      for (std::size_t i = 0; i < vars.size(); ++i) map_.emplace(vars[i], i);
    }
  }
  std::uint16_t operator()(VarId x) const {
    if (!map_.empty()) return static_cast<std::uint16_t>(map_.at(x));
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == x) return static_cast<std::uint16_t>(i);
    throw FormulaError("internal: variable missing from free list");
  }

 private:
  const std::vector<VarId>& vars_;
  std::unordered_map<VarId, std::size_t> map_;
};

}  // namespace

VarId fresh_var(const std::string& hint) {
  auto& r = registry();
  std::lock_guard<std::mutex> lock(r.mu);
  r.hints.push_back(hint.empty() ? std::string("v") : hint);
  return static_cast<VarId>(r.hints.size() - 1);
}

VarId fresh_like(VarId v) { return fresh_var(var_hint(v)); }

const std::string& var_hint(VarId v) {
  auto& r = registry();
  std::lock_guard<std::mutex> lock(r.mu);
  if (v >= r.hints.size()) throw FormulaError("unknown variable id " + std::to_string(v));
  return r.hints[v];
}

std::vector<VarId> fresh_vars(const std::string& prefix, int count, int first_index) {
  std::vector<VarId> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.push_back(fresh_var(prefix + std::to_string(first_index + i)));
  return out;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Const: return "const";
    case Kind::Dist: return "dist";
    case Kind::Affine: return "affine";
    case Kind::Inf: return "inf";
    case Kind::Sup: return "sup";
  }
  return "?";
}

bool Node::has_free(VarId x) const { return std::find(free_.begin(), free_.end(), x) != free_.end(); }

struct NodeFactory {
  static Formula finish(std::shared_ptr<Node> n) {
    std::string key;
    key.push_back(static_cast<char>(n->kind_));
    switch (n->kind_) {
      case Kind::Const:
        put_rational(key, n->value_);
        n->saturation_ = 1;
        break;
      case Kind::Dist:
        n->free_.push_back(n->u_);
        if (n->v_ != n->u_) n->free_.push_back(n->v_);
        key.push_back(n->u_ == n->v_ ? 1 : 2);
        n->saturation_ = static_cast<int>(n->free_.size());
        break;
      case Kind::Affine: {
        std::unordered_set<VarId> seen;
        for (const auto& t : n->terms_)
          for (VarId x : t.sub->free_vars())
            if (seen.insert(x).second) n->free_.push_back(x);
        PositionIndex index(n->free_);
        put_rational(key, n->value_);
        put(key, static_cast<std::uint32_t>(n->terms_.size()));
        int sat = std::max<int>(1, static_cast<int>(n->free_.size()));
        for (const auto& t : n->terms_) {
          std::vector<std::uint16_t> pos;
          pos.reserve(t.sub->free_vars().size());
          for (VarId x : t.sub->free_vars()) pos.push_back(index(x));
          put_rational(key, t.coef);
          put(key, t.sub->shape());
          put(key, static_cast<std::uint32_t>(pos.size()));
          for (auto p : pos) put(key, p);
          n->positions_.push_back(std::move(pos));
          sat = std::max(sat, t.sub->saturation());
          n->quantifiers_ = sat_add(n->quantifiers_, t.sub->quantifier_count());
          n->size_ = sat_add(n->size_, t.sub->size());
        }
        n->saturation_ = sat;
        break;
      }
      case Kind::Inf:
      case Kind::Sup: {
        const auto& bf = n->body_->free_vars();
        for (VarId x : bf)
          if (x != n->u_) n->free_.push_back(x);
        PositionIndex index(n->free_);
        std::vector<std::uint16_t> pos;
        for (VarId x : bf) pos.push_back(x == n->u_ ? static_cast<std::uint16_t>(n->free_.size()) : index(x));
        put(key, n->body_->shape());
        for (auto p : pos) put(key, p);
        n->positions_.push_back(std::move(pos));
        n->saturation_ = std::max<int>(static_cast<int>(bf.size()), n->body_->saturation());
        n->quantifiers_ = sat_add(1, n->body_->quantifier_count());
        n->size_ = sat_add(1, n->body_->size());
        break;
      }
    }
    if (n->free_.size() > 0xFFFE) throw FormulaError("formula has too many free variables");
    n->shape_ = intern(key);
    return n;
  }

  static std::shared_ptr<Node> blank(Kind k) {
    auto n = std::shared_ptr<Node>(new Node());
    n->kind_ = k;
    return n;
  }
  static Formula constant(const Rational& c) {
    auto n = blank(Kind::Const);
    n->value_ = c;
    return finish(n);
  }
  static Formula dist(VarId a, VarId b) {
    auto n = blank(Kind::Dist);
    n->u_ = a;
    n->v_ = b;
    return finish(n);
  }
  static Formula affine(const Rational& c, std::vector<Term> terms) {
    auto n = blank(Kind::Affine);
    n->value_ = c;
    n->terms_ = std::move(terms);
    return finish(n);
  }
  static Formula quant(Kind k, VarId x, const Formula& body) {
    auto n = blank(k);
    n->u_ = x;
    n->body_ = body;
    return finish(n);
  }
};

Formula make_const(const Rational& c) { return NodeFactory::constant(c); }

Formula make_dist(VarId a, VarId b) { return NodeFactory::dist(a, b); }

Formula make_affine(const Rational& constant, std::vector<Term> terms) {
  Rational c = constant;
  std::vector<Term> flat;
  flat.reserve(terms.size());
  for (auto& t : terms) {
    if (t.coef.is_zero()) continue;
    if (!t.sub) throw FormulaError("null subformula");
    switch (t.sub->kind()) {
      case Kind::Const:
        c += t.coef * t.sub->value();
        break;
      case Kind::Affine:
        c += t.coef * t.sub->value();
        for (const auto& inner : t.sub->terms()) {
          Rational k = t.coef * inner.coef;
          if (!k.is_zero()) flat.push_back({k, inner.sub});
        }
        break;
      default:
        flat.push_back(std::move(t));
    }
  }
  if (flat.empty()) return make_const(c);
  if (flat.size() == 1 && c.is_zero() && flat[0].coef == Rational(1)) return flat[0].sub;
  return NodeFactory::affine(c, std::move(flat));
}

Formula make_quant(Kind kind, VarId x, const Formula& body) {
  if (!is_quantifier(kind)) throw FormulaError("make_quant needs inf or sup");
  if (!body->has_free(x)) return body;
  return NodeFactory::quant(kind, x, body);
}

Formula make_inf(VarId x, const Formula& body) { return make_quant(Kind::Inf, x, body); }
Formula make_sup(VarId x, const Formula& body) { return make_quant(Kind::Sup, x, body); }

Formula make_quant_block(Kind kind, const std::vector<VarId>& vars, const Formula& body) {
  Formula f = body;
  for (auto it = vars.rbegin(); it != vars.rend(); ++it) f = make_quant(kind, *it, f);
  return f;
}

Formula sum(const std::vector<Formula>& fs) {
  std::vector<Term> terms;
  terms.reserve(fs.size());
  for (const auto& f : fs) terms.push_back({Rational(1), f});
  return make_affine(0, std::move(terms));
}

Formula scale(const Rational& k, const Formula& f) { return make_affine(0, {{k, f}}); }
Formula add(const Formula& a, const Formula& b) { return make_affine(0, {{1, a}, {1, b}}); }
Formula sub(const Formula& a, const Formula& b) { return make_affine(0, {{1, a}, {-1, b}}); }
Formula add_const(const Formula& f, const Rational& c) { return make_affine(c, {{1, f}}); }

bool alpha_equal(const Formula& a, const Formula& b) {
  return a->shape() == b->shape() && a->free_vars() == b->free_vars();
}

namespace {

Formula subst_rec(const Formula& f, VarMap& map) {
  auto image = [&](VarId x) {
    auto it = map.find(x);
    return it == map.end() ? x : it->second;
  };
  switch (f->kind()) {
    case Kind::Const:
      return f;
    case Kind::Dist:
      return make_dist(image(f->u()), image(f->v()));
    case Kind::Affine: {
      std::vector<Term> terms;
      terms.reserve(f->terms().size());
      for (const auto& t : f->terms()) terms.push_back({t.coef, subst_rec(t.sub, map)});
      return make_affine(f->value(), std::move(terms));
    }
    case Kind::Inf:
    case Kind::Sup: {
      VarId x = f->bound();
      VarId y = fresh_like(x);
      auto prev = map.find(x);
      bool had = prev != map.end();
      VarId old = had ? prev->second : 0;
      map[x] = y;
      Formula body = subst_rec(f->body(), map);
      if (had)
        map[x] = old;
      else
        map.erase(x);
      return make_quant(f->kind(), y, body);
    }
  }
  throw FormulaError("unreachable");
}

}  // namespace

Formula substitute_vars(const Formula& f, const VarMap& mapping) {
  VarMap map = mapping;
  return subst_rec(f, map);
}

Formula refresh_bound(const Formula& f) { return substitute_vars(f, {}); }

namespace {

using TupleMap = std::unordered_map<VarId, std::vector<VarId>>;

Formula replace_rec(const Formula& f, const Formula& tmpl, const std::vector<VarId>& tf, TupleMap& tuples,
                    std::size_t m) {
  switch (f->kind()) {
    case Kind::Const:
      return f;
    case Kind::Dist: {
      auto iu = tuples.find(f->u());
      auto iv = tuples.find(f->v());
      if (iu == tuples.end() || iv == tuples.end())
        throw FormulaError("replace_metric: no tuple for variable '" +
                           var_hint(iu == tuples.end() ? f->u() : f->v()) + "'");
      VarMap map;
      for (std::size_t i = 0; i < m; ++i) {
        map[tf[i]] = iu->second[i];
        map[tf[m + i]] = iv->second[i];
      }
      return substitute_vars(tmpl, map);
    }
    case Kind::Affine: {
      std::vector<Term> terms;
      terms.reserve(f->terms().size());
      for (const auto& t : f->terms()) terms.push_back({t.coef, replace_rec(t.sub, tmpl, tf, tuples, m)});
      return make_affine(f->value(), std::move(terms));
    }
    case Kind::Inf:
    case Kind::Sup: {
      VarId x = f->bound();
      std::vector<VarId> fresh;
      for (std::size_t i = 0; i < m; ++i) fresh.push_back(fresh_var(var_hint(x) + std::to_string(i + 1)));
      auto prev = tuples.find(x);
      std::vector<VarId> saved;
      bool had = prev != tuples.end();
      if (had) saved = prev->second;
      tuples[x] = fresh;
      Formula body = replace_rec(f->body(), tmpl, tf, tuples, m);
      if (had)
        tuples[x] = saved;
      else
        tuples.erase(x);
      return make_quant_block(f->kind(), fresh, body);
    }
  }
  throw FormulaError("unreachable");
}

}  // namespace

Formula replace_metric(const Formula& f, const Formula& tmpl, const std::vector<VarId>& template_free,
                       const std::unordered_map<VarId, std::vector<VarId>>& tuples) {
  if (template_free.empty() || template_free.size() % 2 != 0)
    throw FormulaError("replace_metric: template needs an even, positive number of variables");
  std::size_t m = template_free.size() / 2;
  for (const auto& [var, tuple] : tuples)
    if (tuple.size() != m) throw FormulaError("replace_metric: tuple arity mismatch for '" + var_hint(var) + "'");
  for (VarId x : tmpl->free_vars())
    if (std::find(template_free.begin(), template_free.end(), x) == template_free.end())
      throw FormulaError("replace_metric: template has undeclared free variable '" + var_hint(x) + "'");
  TupleMap map = tuples;
  return replace_rec(f, tmpl, template_free, map, m);
}

namespace {

Formula scale_rec(const Formula& f, const Rational& k) {
  if (k.is_zero()) return make_const(0);
  switch (f->kind()) {
    case Kind::Const:
      return make_const(k * f->value());
    case Kind::Dist:
      return make_affine(0, {{k, f}});
    case Kind::Affine: {
      std::vector<Term> terms;
      terms.reserve(f->terms().size());
      for (const auto& t : f->terms()) terms.push_back({1, scale_rec(t.sub, k * t.coef)});
      return make_affine(k * f->value(), std::move(terms));
    }
    case Kind::Inf:
    case Kind::Sup: {
      Kind kind = k.sign() > 0 ? f->kind() : dual(f->kind());
      return make_quant(kind, f->bound(), scale_rec(f->body(), k));
    }
  }
  throw FormulaError("unreachable");
}

void split_terms(const Formula& f, Rational& constant, std::vector<Term>& terms) {
  if (f->kind() == Kind::Affine) {
    constant = f->value();
    terms = f->terms();
  } else if (f->kind() == Kind::Const) {
    constant = f->value();
  } else {
    constant = 0;
    terms.push_back({1, f});
  }
}

Formula miniscope_rec(const Formula& f) {
  switch (f->kind()) {
    case Kind::Const:
    case Kind::Dist:
      return f;
    case Kind::Affine: {
      std::vector<Term> terms;
      terms.reserve(f->terms().size());
      for (const auto& t : f->terms()) terms.push_back({t.coef, miniscope_rec(t.sub)});
      return make_affine(f->value(), std::move(terms));
    }
    case Kind::Inf:
    case Kind::Sup:
      break;
  }
  Kind kind = f->kind();
  std::vector<VarId> vars;
  Formula body = f;
  while (body->kind() == kind) {
    vars.push_back(body->bound());
    body = body->body();
  }
  body = miniscope_rec(body);
  Rational constant;
  std::vector<Term> terms;
  split_terms(body, constant, terms);

  std::unordered_map<VarId, std::size_t> var_index;
  for (std::size_t i = 0; i < vars.size(); ++i) var_index.emplace(vars[i], i);
  std::vector<std::size_t> parent(vars.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::vector<int> term_anchor(terms.size(), -1);
  for (std::size_t t = 0; t < terms.size(); ++t) {
    for (VarId x : terms[t].sub->free_vars()) {
      auto it = var_index.find(x);
      if (it == var_index.end()) continue;
      if (term_anchor[t] < 0)
        term_anchor[t] = static_cast<int>(it->second);
      else
        parent[find(it->second)] = find(static_cast<std::size_t>(term_anchor[t]));
    }
  }
  std::vector<Term> out;
  std::vector<std::size_t> roots;
  std::unordered_map<std::size_t, std::vector<Term>> groups;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    if (term_anchor[t] < 0) {
      out.push_back(terms[t]);
      continue;
    }
    std::size_t root = find(static_cast<std::size_t>(term_anchor[t]));
    auto [it, inserted] = groups.try_emplace(root);
    if (inserted) roots.push_back(root);
    it->second.push_back(terms[t]);
  }
  for (std::size_t root : roots) {
    std::vector<VarId> comp;
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (find(i) == root) comp.push_back(vars[i]);
    out.push_back({1, make_quant_block(kind, comp, make_affine(0, std::move(groups[root])))});
  }
  return make_affine(constant, std::move(out));
}

}  // namespace

Formula scale_flatten(const Formula& f) { return scale_rec(f, 1); }

Formula miniscope(const Formula& f) { return miniscope_rec(f); }

Bounds bounds(const Formula& f) {
  switch (f->kind()) {
    case Kind::Const:
      return {f->value(), f->value()};
    case Kind::Dist:
      return {0, 1};
    case Kind::Affine: {
      Bounds b{f->value(), f->value()};
      for (const auto& t : f->terms()) {
        Bounds s = bounds(t.sub);
        if (t.coef.sign() > 0) {
          b.lo += t.coef * s.lo;
          b.hi += t.coef * s.hi;
        } else {
          b.lo += t.coef * s.hi;
          b.hi += t.coef * s.lo;
        }
      }
      return b;
    }
    case Kind::Inf:
    case Kind::Sup:
      return bounds(f->body());
  }
  throw FormulaError("unreachable");
}

std::int64_t denominator_lcm(const Formula& f) {
  switch (f->kind()) {
    case Kind::Const:
      return f->value().den();
    case Kind::Dist:
      return 1;
    case Kind::Affine: {
      std::int64_t l = f->value().den();
      for (const auto& t : f->terms()) {
        Rational step = Rational(1, t.coef.den()) / Rational(denominator_lcm(t.sub));
        l = std::lcm(l, step.den());
      }
      return l;
    }
    case Kind::Inf:
    case Kind::Sup:
      return denominator_lcm(f->body());
  }
  throw FormulaError("unreachable");
}

namespace {
void collect_bound(const Formula& f, std::vector<VarId>& out) {
  switch (f->kind()) {
    case Kind::Const:
    case Kind::Dist:
      return;
    case Kind::Affine:
      for (const auto& t : f->terms()) collect_bound(t.sub, out);
      return;
    case Kind::Inf:
    case Kind::Sup:
      out.push_back(f->bound());
      collect_bound(f->body(), out);
      return;
  }
}
}  // namespace

std::vector<VarId> bound_vars(const Formula& f) {
  std::vector<VarId> out;
  collect_bound(f, out);
  return out;
}

}  // namespace affmetric
