#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "affmetric/formula.hpp"
#include "affmetric/types.hpp"

namespace affmetric {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Valuation {
  std::unordered_map<VarId, int> labels;
  int ell = 1;
};

// Value of f in a structure of cardinality ell at a tuple realizing the
// valuation's equality pattern. Quantifiers range over the labels in use plus
// one fresh label, capped at ell.
Rational eval(const Formula& f, const Valuation& v);
// vars[i] receives label labels[i].
Rational eval_labels(const Formula& f, const std::vector<VarId>& vars, const std::vector<int>& labels, int ell);
Rational eval_type(const Formula& f, const std::vector<VarId>& vars, const TupleType& t, int ell);

// Memoizing evaluator. Results are cached per (alpha-equivalence class,
// effective cardinality, type of the free variables). Same-kind quantifier
// blocks are evaluated by variable elimination over their summed terms.
// Not thread-safe; use one instance per thread.
class Evaluator {
 public:
  Evaluator();
  ~Evaluator();
  Evaluator(const Evaluator&) = delete;
  Evaluator& operator=(const Evaluator&) = delete;

  Rational eval(const Formula& f, const std::vector<VarId>& vars, const std::vector<int>& labels, int ell);

  void clear();
  std::size_t memo_size() const;
  // Largest factor table a single block may allocate.
  void set_table_limit(std::size_t entries) { table_limit_ = entries; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t table_limit_ = 50'000'000;
};

Evaluator& thread_evaluator();

}  // namespace affmetric
