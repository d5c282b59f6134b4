#include "affmetric/prenex.hpp"

namespace affmetric {

namespace {

struct Block {
  Kind kind;
  std::vector<VarId> vars;
};

struct Pulled {
  std::vector<Block> blocks;
  Formula matrix;
};

void append_block(std::vector<Block>& out, Kind kind, const std::vector<VarId>& vars) {
  if (vars.empty()) return;
  if (!out.empty() && out.back().kind == kind) {
    out.back().vars.insert(out.back().vars.end(), vars.begin(), vars.end());
  } else {
    out.push_back({kind, vars});
  }
}

std::vector<Block> merge(const std::vector<const std::vector<Block>*>& seqs, Kind start) {
  std::vector<std::size_t> next(seqs.size(), 0);
  std::vector<Block> out;
  Kind kind = start;
  while (true) {
    bool remaining = false;
    for (std::size_t i = 0; i < seqs.size(); ++i)
      if (next[i] < seqs[i]->size()) remaining = true;
    if (!remaining) break;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      if (next[i] < seqs[i]->size() && (*seqs[i])[next[i]].kind == kind) {
        append_block(out, kind, (*seqs[i])[next[i]].vars);
        ++next[i];
      }
    }
    kind = dual(kind);
  }
  return out;
}

// f is scale-flattened with unique binders. hint is the kind the first
// merged block should take, if any.
Pulled pull(const Formula& f, const Kind* hint) {
  switch (f->kind()) {
    case Kind::Const:
    case Kind::Dist:
      return {{}, f};
    case Kind::Inf:
    case Kind::Sup: {
      Kind k = f->kind();
      Pulled inner = pull(f->body(), &k);
      std::vector<Block> blocks;
      append_block(blocks, k, {f->bound()});
      for (const auto& b : inner.blocks) append_block(blocks, b.kind, b.vars);
      return {std::move(blocks), inner.matrix};
    }
    case Kind::Affine:
      break;
  }
  std::vector<Pulled> parts;
  std::vector<Term> matrix_terms;
  for (const auto& t : f->terms()) {
    Pulled p = pull(t.sub, nullptr);
    matrix_terms.push_back({t.coef, p.matrix});
    if (!p.blocks.empty()) parts.push_back(std::move(p));
  }
  Formula matrix = make_affine(f->value(), std::move(matrix_terms));
  if (parts.empty()) return {{}, matrix};
  std::vector<const std::vector<Block>*> seqs;
  for (const auto& p : parts) seqs.push_back(&p.blocks);
  if (hint) return {merge(seqs, *hint), matrix};
  Kind first = parts.front().blocks.front().kind;
  auto a = merge(seqs, first);
  auto b = merge(seqs, dual(first));
  return {b.size() < a.size() ? std::move(b) : std::move(a), matrix};
}

}  // namespace

PrenexForm to_prenex(const Formula& f) {
  Formula g = scale_flatten(refresh_bound(f));
  Pulled p = pull(g, nullptr);
  PrenexForm out;
  for (const auto& b : p.blocks)
    for (VarId x : b.vars) out.prefix.emplace_back(b.kind, x);
  out.matrix = p.matrix;
  return out;
}

std::size_t count_alternations(const PrenexForm& p) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < p.prefix.size(); ++i)
    if (p.prefix[i].first != p.prefix[i - 1].first) ++n;
  return n;
}

Formula prenex_formula(const PrenexForm& p) {
  Formula f = p.matrix;
  for (auto it = p.prefix.rbegin(); it != p.prefix.rend(); ++it) f = make_quant(it->first, it->second, f);
  return f;
}

std::vector<std::pair<Kind, std::size_t>> prefix_blocks(const PrenexForm& p) {
  std::vector<std::pair<Kind, std::size_t>> out;
  for (const auto& [k, x] : p.prefix) {
    if (!out.empty() && out.back().first == k)
      ++out.back().second;
    else
      out.emplace_back(k, 1);
  }
  return out;
}

}  // namespace affmetric
