#include "affmetric/evaluator.hpp"

#include <algorithm>
#include <cstring>

namespace affmetric {

namespace {

// Stack storage for short label vectors.
class LabelBuf {
 public:
  explicit LabelBuf(std::size_t n) : size_(n) {
    if (n > kInline) heap_.resize(n);
  }
  int* data() { return size_ > kInline ? heap_.data() : inline_; }
  std::size_t size() const { return size_; }

 private:
  static constexpr std::size_t kInline = 24;
  std::size_t size_;
  int inline_[kInline];
  std::vector<int> heap_;
};

struct BlockTerm {
  Rational coef;
  Formula sub;
  std::vector<int> ctx;    // context index of each free variable of sub
  std::vector<int> scope;  // sorted block-variable indices occurring in sub
};

struct BlockPlan {
  Formula keep;
  Kind kind = Kind::Inf;
  int p = 0;  // outer free variables
  int k = 0;  // block variables
  Rational constant;
  std::vector<BlockTerm> terms;
  std::vector<int> order;
};

struct Factor {
  std::vector<int> vars;  // sorted block-variable indices, first is fastest
  std::vector<Rational> table;
};

std::size_t checked_pow(int base, std::size_t exp, std::size_t limit) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    r *= static_cast<std::size_t>(base);
    if (r > limit) throw EvalError("quantifier block needs a factor table of more than " + std::to_string(limit) + " entries");
  }
  return r;
}

std::vector<int> elimination_order(int k, const std::vector<BlockTerm>& terms) {
  std::vector<std::vector<int>> scopes;
  for (const auto& t : terms)
    if (!t.scope.empty()) scopes.push_back(t.scope);
  std::vector<bool> done(k, false);
  std::vector<int> order;
  order.reserve(k);
  for (int step = 0; step < k; ++step) {
    int best = -1;
    std::size_t best_size = SIZE_MAX;
    std::vector<int> best_union;
    for (int v = 0; v < k; ++v) {
      if (done[v]) continue;
      std::vector<int> uni;
      for (const auto& s : scopes)
        if (std::binary_search(s.begin(), s.end(), v)) uni.insert(uni.end(), s.begin(), s.end());
      std::sort(uni.begin(), uni.end());
      uni.erase(std::unique(uni.begin(), uni.end()), uni.end());
      if (uni.size() < best_size) {
        best_size = uni.size();
        best = v;
        best_union = std::move(uni);
      }
    }
    done[best] = true;
    order.push_back(best);
    std::vector<std::vector<int>> next;
    for (auto& s : scopes)
      if (!std::binary_search(s.begin(), s.end(), best)) next.push_back(std::move(s));
    best_union.erase(std::remove(best_union.begin(), best_union.end(), best), best_union.end());
    if (!best_union.empty()) next.push_back(std::move(best_union));
    scopes = std::move(next);
  }
  return order;
}

}  // namespace

struct Evaluator::Impl {
  std::unordered_map<std::string, Rational> memo;
  std::unordered_map<std::uint32_t, std::unique_ptr<BlockPlan>> plans;
  std::unordered_map<const Node*, std::pair<Formula, Formula>> roots;
  std::size_t table_limit = 0;

  const Formula& root(const Formula& f) {
    auto it = roots.find(f.get());
    if (it != roots.end()) return it->second.second;
    auto [ins, ok] = roots.emplace(f.get(), std::make_pair(f, miniscope(f)));
    return ins->second.second;
  }

  const BlockPlan& plan(const Formula& n) {
    auto it = plans.find(n->shape());
    if (it != plans.end()) return *it->second;
    auto plan = std::make_unique<BlockPlan>();
    plan->keep = n;
    plan->kind = n->kind();
    const auto& outer = n->free_vars();
    plan->p = static_cast<int>(outer.size());
    std::unordered_map<VarId, int> ctx_index;
    for (std::size_t i = 0; i < outer.size(); ++i) ctx_index.emplace(outer[i], static_cast<int>(i));
    Formula body = n;
    while (body->kind() == plan->kind) {
      ctx_index.emplace(body->bound(), plan->p + plan->k);
      ++plan->k;
      body = body->body();
    }
    std::vector<Term> terms;
    if (body->kind() == Kind::Affine) {
      plan->constant = body->value();
      terms = body->terms();
    } else if (body->kind() == Kind::Const) {
      plan->constant = body->value();
    } else {
      terms.push_back({1, body});
    }
    for (auto& t : terms) {
      BlockTerm bt;
      bt.coef = t.coef;
      bt.sub = t.sub;
      for (VarId x : t.sub->free_vars()) {
        int c = ctx_index.at(x);
        bt.ctx.push_back(c);
        if (c >= plan->p) bt.scope.push_back(c - plan->p);
      }
      std::sort(bt.scope.begin(), bt.scope.end());
      plan->terms.push_back(std::move(bt));
    }
    plan->order = elimination_order(plan->k, plan->terms);
    auto& ref = *plan;
    plans.emplace(n->shape(), std::move(plan));
    return ref;
  }

  Rational node(const Formula& n, const int* labels, int ell) {
    switch (n->kind()) {
      case Kind::Const:
        return n->value();
      case Kind::Dist:
        if (n->free_vars().size() == 1) return 0;
        return labels[0] == labels[1] ? 0 : 1;
      case Kind::Affine:
        if (n->quantifier_count() == 0) return affine(n, labels, ell);
        break;
      case Kind::Inf:
      case Kind::Sup:
        break;
    }
    int e = std::min(ell, n->saturation());
    std::size_t m = n->free_vars().size();
    LabelBuf rgs(m);
    int* r = rgs.data();
    std::vector<int> seen;
    seen.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      int label = labels[i];
      std::size_t j = 0;
      while (j < seen.size() && seen[j] != label) ++j;
      if (j == seen.size()) seen.push_back(label);
      r[i] = static_cast<int>(j);
    }
    std::string key;
    key.resize(4 + 2 + 2 * m);
    std::uint32_t shape = n->shape();
    std::memcpy(key.data(), &shape, 4);
    std::uint16_t e16 = static_cast<std::uint16_t>(e);
    std::memcpy(key.data() + 4, &e16, 2);
    for (std::size_t i = 0; i < m; ++i) {
      std::uint16_t v = static_cast<std::uint16_t>(r[i]);
      std::memcpy(key.data() + 6 + 2 * i, &v, 2);
    }
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    Rational value = n->kind() == Kind::Affine ? affine(n, r, e) : block(plan(n), r, e);
    memo.emplace(std::move(key), value);
    return value;
  }

  Rational affine(const Formula& n, const int* labels, int ell) {
    Rational acc = n->value();
    const auto& terms = n->terms();
    const auto& positions = n->child_positions();
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const auto& pos = positions[i];
      LabelBuf buf(pos.size());
      int* b = buf.data();
      for (std::size_t j = 0; j < pos.size(); ++j) b[j] = labels[pos[j]];
      acc += terms[i].coef * node(terms[i].sub, b, ell);
    }
    return acc;
  }

  Rational term_value(const BlockTerm& t, const std::vector<int>& ctx, int ell) {
    LabelBuf buf(t.ctx.size());
    int* b = buf.data();
    for (std::size_t j = 0; j < t.ctx.size(); ++j) b[j] = ctx[t.ctx[j]];
    return t.coef * node(t.sub, b, ell);
  }

  Rational block(const BlockPlan& plan, const int* rgs, int e) {
    std::vector<int> ctx(plan.p + plan.k, 0);
    std::copy(rgs, rgs + plan.p, ctx.begin());
    Rational acc = plan.constant;
    std::vector<Factor> factors;
    for (const auto& t : plan.terms) {
      if (t.scope.empty()) {
        acc += term_value(t, ctx, e);
        continue;
      }
      Factor f;
      f.vars = t.scope;
      std::size_t size = checked_pow(e, f.vars.size(), table_limit);
      f.table.resize(size);
      std::vector<int> digit(f.vars.size(), 0);
      for (int v : f.vars) ctx[plan.p + v] = 0;
      for (std::size_t idx = 0; idx < size; ++idx) {
        f.table[idx] = term_value(t, ctx, e);
        for (std::size_t j = 0; j < digit.size(); ++j) {
          if (++digit[j] < e) {
            ctx[plan.p + f.vars[j]] = digit[j];
            break;
          }
          digit[j] = 0;
          ctx[plan.p + f.vars[j]] = 0;
        }
      }
      factors.push_back(std::move(f));
    }
    bool maximize = plan.kind == Kind::Sup;
    for (int v : plan.order) {
      std::vector<Factor> touched;
      std::vector<Factor> rest;
      for (auto& f : factors) {
        if (std::binary_search(f.vars.begin(), f.vars.end(), v))
          touched.push_back(std::move(f));
        else
          rest.push_back(std::move(f));
      }
      if (touched.empty()) continue;
      std::vector<int> out_vars;
      for (const auto& f : touched) out_vars.insert(out_vars.end(), f.vars.begin(), f.vars.end());
      std::sort(out_vars.begin(), out_vars.end());
      out_vars.erase(std::unique(out_vars.begin(), out_vars.end()), out_vars.end());
      out_vars.erase(std::remove(out_vars.begin(), out_vars.end(), v), out_vars.end());

      std::size_t nf = touched.size();
      // stride[i][j]: stride of out_vars[j] in factor i; vstride[i]: stride of v.
      std::vector<std::vector<std::size_t>> stride(nf, std::vector<std::size_t>(out_vars.size(), 0));
      std::vector<std::size_t> vstride(nf, 0);
      for (std::size_t i = 0; i < nf; ++i) {
        std::size_t s = 1;
        for (int var : touched[i].vars) {
          if (var == v) {
            vstride[i] = s;
          } else {
            auto pos = std::lower_bound(out_vars.begin(), out_vars.end(), var) - out_vars.begin();
            stride[i][pos] = s;
          }
          s *= static_cast<std::size_t>(e);
        }
      }
      Factor result;
      result.vars = out_vars;
      std::size_t size = checked_pow(e, out_vars.size(), table_limit);
      checked_pow(e, out_vars.size() + 1, table_limit);
      result.table.resize(size);
      std::vector<std::size_t> base(nf, 0);
      std::vector<int> digit(out_vars.size(), 0);
      for (std::size_t idx = 0; idx < size; ++idx) {
        Rational best;
        for (int val = 0; val < e; ++val) {
          Rational s = 0;
          for (std::size_t i = 0; i < nf; ++i) s += touched[i].table[base[i] + val * vstride[i]];
          if (val == 0 || (maximize ? s > best : s < best)) best = s;
        }
        result.table[idx] = best;
        for (std::size_t j = 0; j < digit.size(); ++j) {
          if (++digit[j] < e) {
            for (std::size_t i = 0; i < nf; ++i) base[i] += stride[i][j];
            break;
          }
          digit[j] = 0;
          for (std::size_t i = 0; i < nf; ++i) base[i] -= stride[i][j] * static_cast<std::size_t>(e - 1);
        }
      }
      rest.push_back(std::move(result));
      factors = std::move(rest);
    }
    for (const auto& f : factors) {
      if (!f.vars.empty()) throw EvalError("internal: uneliminated block variable");
      acc += f.table[0];
    }
    return acc;
  }
};

Evaluator::Evaluator() : impl_(std::make_unique<Impl>()) {}
Evaluator::~Evaluator() = default;

void Evaluator::clear() {
  impl_->memo.clear();
  impl_->plans.clear();
  impl_->roots.clear();
}

std::size_t Evaluator::memo_size() const { return impl_->memo.size(); }

Rational Evaluator::eval(const Formula& f, const std::vector<VarId>& vars, const std::vector<int>& labels, int ell) {
  if (ell < 1) throw EvalError("structure cardinality must be at least 1");
  if (vars.size() != labels.size()) throw EvalError("variable and label counts differ");
  std::unordered_map<VarId, int> assigned;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= ell)
      throw EvalError("label " + std::to_string(labels[i]) + " out of range for cardinality " + std::to_string(ell));
    auto [it, inserted] = assigned.emplace(vars[i], labels[i]);
    if (!inserted && it->second != labels[i]) throw EvalError("variable '" + var_hint(vars[i]) + "' assigned twice");
  }
  impl_->table_limit = table_limit_;
  const Formula& r = impl_->root(f);
  const auto& fv = r->free_vars();
  std::vector<int> local(fv.size());
  for (std::size_t i = 0; i < fv.size(); ++i) {
    auto it = assigned.find(fv[i]);
    if (it == assigned.end()) throw EvalError("unassigned free variable '" + var_hint(fv[i]) + "'");
    local[i] = it->second;
  }
  return impl_->node(r, local.data(), ell);
}

Evaluator& thread_evaluator() {
  thread_local Evaluator ev;
  return ev;
}

Rational eval(const Formula& f, const Valuation& v) {
  std::vector<VarId> vars;
  std::vector<int> labels;
  for (const auto& [x, l] : v.labels) {
    vars.push_back(x);
    labels.push_back(l);
  }
  return thread_evaluator().eval(f, vars, labels, v.ell);
}

Rational eval_labels(const Formula& f, const std::vector<VarId>& vars, const std::vector<int>& labels, int ell) {
  return thread_evaluator().eval(f, vars, labels, ell);
}

Rational eval_type(const Formula& f, const std::vector<VarId>& vars, const TupleType& t, int ell) {
  return thread_evaluator().eval(f, vars, t, ell);
}

}  // namespace affmetric
