#pragma once

#include <utility>
#include <vector>

#include "affmetric/formula.hpp"

namespace affmetric {

struct PrenexForm {
  std::vector<std::pair<Kind, VarId>> prefix;
  Formula matrix;
};

// Eval-equivalent prenex form. Quantifiers of summed subterms are interleaved
// without reordering any subterm's own prefix, clustering same-kind
// quantifiers greedily; the first merged block under a quantifier continues
// that quantifier's kind.
PrenexForm to_prenex(const Formula& f);
std::size_t count_alternations(const PrenexForm& p);
// Prefix applied to the matrix.
Formula prenex_formula(const PrenexForm& p);
// Kinds of the maximal same-kind blocks of the prefix.
std::vector<std::pair<Kind, std::size_t>> prefix_blocks(const PrenexForm& p);

}  // namespace affmetric
