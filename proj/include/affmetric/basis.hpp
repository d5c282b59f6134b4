#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "affmetric/formula.hpp"
#include "affmetric/types.hpp"

namespace affmetric {

using Matrix = std::vector<std::vector<Rational>>;

// The i-th generating formula (1..15) over the distinguished variables
// xyzw = (x, y, z, w).
Formula build_phi(int i, const std::vector<VarId>& xyzw);
std::vector<Formula> build_basis(const std::vector<VarId>& xyzw);

// entry(i, j) = value of formulas[i] at types[j].
Matrix value_matrix(const std::vector<Formula>& formulas, const std::vector<VarId>& vars,
                    const std::vector<TupleType>& types, int ell);

// Rank over the rationals (fraction-free elimination).
std::size_t exact_rank(const Matrix& m);

class NoSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Coefficients c with sum_i c[i] * row(i) = target. Pivots are taken in
// column order; free coefficients are set to 0.
std::vector<Rational> solve_target(const Matrix& m, const std::vector<Rational>& target);
bool is_solution(const Matrix& m, const std::vector<Rational>& target, const std::vector<Rational>& coefficients);

// d2 over (x, y, z, w) as phi2 - phi3 - phi4 - phi8 + phi10 + phi15.
std::vector<Rational> theta2_coefficients();
Formula theta2_combination(const std::vector<VarId>& xyzw);
// Prenex form sup a sup b inf c of the thirteen-term matrix.
Formula assemble_theta2(const std::vector<VarId>& xyzw);

std::vector<Rational> d2_target(const std::vector<TupleType>& types);

std::string matrix_csv(const Matrix& m, const std::vector<TupleType>& types);
std::string coefficients_json(const std::vector<Rational>& coefficients);

}  // namespace affmetric
