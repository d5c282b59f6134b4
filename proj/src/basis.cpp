#include "affmetric/basis.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "affmetric/evaluator.hpp"

namespace affmetric {

namespace mp = boost::multiprecision;

namespace {

Formula d(VarId a, VarId b) { return make_dist(a, b); }

// inf_a (1 + d(p,a) + d(q,a) + d(r,a))
Formula card3_form(VarId p, VarId q, VarId r) {
  VarId a = fresh_var("a");
  return make_inf(a, make_affine(1, {{1, d(p, a)}, {1, d(q, a)}, {1, d(r, a)}}));
}

}  // namespace

Formula build_phi(int i, const std::vector<VarId>& v) {
  if (v.size() != 4) throw std::invalid_argument("build_phi needs four variables");
  VarId x = v[0], y = v[1], z = v[2], w = v[3];
  switch (i) {
    case 1: return make_const(1);
    case 2: return d(x, y);
    case 3: return d(x, z);
    case 4: return d(x, w);
    case 5: return d(y, z);
    case 6: return d(y, w);
    case 7: return d(z, w);
    case 8: return card3_form(x, y, z);
    case 9: return card3_form(x, y, w);
    case 10: return card3_form(x, z, w);
    case 11: return card3_form(y, z, w);
    case 12: {
      VarId a = fresh_var("a");
      return make_sup(a, make_affine(4, {{-1, d(a, x)}, {-1, d(a, y)}, {-1, d(a, z)}, {-1, d(a, w)}}));
    }
    case 13: {
      VarId a = fresh_var("a");
      return make_sup(a, make_affine(-2, {{1, d(a, x)}, {1, d(a, y)}, {1, d(a, z)}, {-1, d(a, w)}}));
    }
    case 14: {
      VarId a = fresh_var("a");
      return make_sup(a, make_affine(0, {{1, d(a, x)}, {1, d(a, y)}, {-1, d(a, z)}, {-1, d(a, w)}}));
    }
    case 15: {
      VarId a = fresh_var("a");
      return make_sup(a, make_affine(0, {{2, d(a, x)}, {-2, d(a, z)}, {1, d(a, y)}, {-1, d(a, w)}}));
    }
    default:
      throw std::out_of_range("basis index must be in 1..15, got " + std::to_string(i));
  }
}

std::vector<Formula> build_basis(const std::vector<VarId>& xyzw) {
  std::vector<Formula> out;
  for (int i = 1; i <= 15; ++i) out.push_back(build_phi(i, xyzw));
  return out;
}

Matrix value_matrix(const std::vector<Formula>& formulas, const std::vector<VarId>& vars,
                    const std::vector<TupleType>& types, int ell) {
  Matrix m(formulas.size(), std::vector<Rational>(types.size()));
  for (std::size_t i = 0; i < formulas.size(); ++i)
    for (std::size_t j = 0; j < types.size(); ++j) m[i][j] = eval_type(formulas[i], vars, types[j], ell);
  return m;
}

std::size_t exact_rank(const Matrix& m) {
  if (m.empty()) return 0;
  std::size_t rows = m.size(), cols = m[0].size();
  std::vector<std::vector<mp::cpp_int>> a(rows, std::vector<mp::cpp_int>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    mp::cpp_int l = 1;
    for (const auto& x : m[i]) l = mp::lcm(l, mp::cpp_int(x.den()));
    for (std::size_t j = 0; j < cols; ++j) a[i][j] = mp::cpp_int(m[i][j].num()) * (l / m[i][j].den());
  }
  std::size_t rank = 0;
  mp::cpp_int prev = 1;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t p = rank;
    while (p < rows && a[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[rank]);
    for (std::size_t i = rank + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) a[i][j] = (a[rank][c] * a[i][j] - a[i][c] * a[rank][j]) / prev;
      a[i][c] = 0;
    }
    prev = a[rank][c];
    ++rank;
  }
  return rank;
}

std::vector<Rational> solve_target(const Matrix& m, const std::vector<Rational>& target) {
  std::size_t unknowns = m.size();
  if (unknowns == 0) throw NoSolution("empty system");
  std::size_t eqs = m[0].size();
  if (target.size() != eqs) throw std::invalid_argument("target length differs from the number of types");
  // Augmented system: one row per type, one column per formula.
  std::vector<std::vector<mp::cpp_rational>> a(eqs, std::vector<mp::cpp_rational>(unknowns + 1));
  for (std::size_t j = 0; j < eqs; ++j) {
    for (std::size_t i = 0; i < unknowns; ++i) a[j][i] = mp::cpp_rational(m[i][j].num(), m[i][j].den());
    a[j][unknowns] = mp::cpp_rational(target[j].num(), target[j].den());
  }
  std::vector<std::size_t> pivot_col;
  std::size_t row = 0;
  for (std::size_t c = 0; c < unknowns && row < eqs; ++c) {
    std::size_t p = row;
    while (p < eqs && a[p][c] == 0) ++p;
    if (p == eqs) continue;
    std::swap(a[p], a[row]);
    mp::cpp_rational inv = 1 / a[row][c];
    for (auto& x : a[row]) x *= inv;
    for (std::size_t i = 0; i < eqs; ++i) {
      if (i == row || a[i][c] == 0) continue;
      mp::cpp_rational k = a[i][c];
      for (std::size_t j = c; j <= unknowns; ++j) a[i][j] -= k * a[row][j];
    }
    pivot_col.push_back(c);
    ++row;
  }
  for (std::size_t i = row; i < eqs; ++i)
    if (a[i][unknowns] != 0) throw NoSolution("target is not in the span of the formulas");
  std::vector<Rational> out(unknowns, Rational(0));
  for (std::size_t r = 0; r < pivot_col.size(); ++r) {
    const auto& v = a[r][unknowns];
    mp::cpp_int num = mp::numerator(v), den = mp::denominator(v);
    if (mp::abs(num) > INT64_MAX || den > INT64_MAX) throw std::overflow_error("coefficient exceeds 64 bits");
    out[pivot_col[r]] = Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
  }
  return out;
}

bool is_solution(const Matrix& m, const std::vector<Rational>& target, const std::vector<Rational>& c) {
  if (c.size() != m.size()) return false;
  for (std::size_t j = 0; j < target.size(); ++j) {
    Rational s = 0;
    for (std::size_t i = 0; i < m.size(); ++i) s += c[i] * m[i][j];
    if (s != target[j]) return false;
  }
  return true;
}

std::vector<Rational> theta2_coefficients() {
  std::vector<Rational> c(15, Rational(0));
  c[1] = 1;
  c[2] = -1;
  c[3] = -1;
  c[7] = -1;
  c[9] = 1;
  c[14] = 1;
  return c;
}

Formula theta2_combination(const std::vector<VarId>& xyzw) {
  auto c = theta2_coefficients();
  std::vector<Term> terms;
  for (int i = 1; i <= 15; ++i)
    if (!c[i - 1].is_zero()) terms.push_back({c[i - 1], build_phi(i, xyzw)});
  return make_affine(0, std::move(terms));
}

Formula assemble_theta2(const std::vector<VarId>& v) {
  if (v.size() != 4) throw std::invalid_argument("assemble_theta2 needs four variables");
  VarId x = v[0], y = v[1], z = v[2], w = v[3];
  VarId a = fresh_var("a"), b = fresh_var("b"), c = fresh_var("c");
  Formula matrix = make_affine(0, {{1, d(x, y)},
                                   {-1, d(x, z)},
                                   {-1, d(x, w)},
                                   {2, d(a, x)},
                                   {-2, d(a, z)},
                                   {1, d(a, y)},
                                   {-1, d(a, w)},
                                   {-1, d(b, x)},
                                   {-1, d(b, y)},
                                   {-1, d(b, z)},
                                   {1, d(c, x)},
                                   {1, d(c, z)},
                                   {1, d(c, w)}});
  return make_sup(a, make_sup(b, make_inf(c, matrix)));
}

std::vector<Rational> d2_target(const std::vector<TupleType>& types) {
  std::vector<Rational> out;
  for (const auto& t : types) out.emplace_back(eval_dn(t));
  return out;
}

std::string matrix_csv(const Matrix& m, const std::vector<TupleType>& types) {
  std::string out = "formula";
  for (const auto& t : types) out += "," + render_type(t);
  out += "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += "phi" + std::to_string(i + 1);
    for (const auto& x : m[i]) out += "," + std::to_string(x.num()) + "/" + std::to_string(x.den());
    out += "\n";
  }
  return out;
}

std::string coefficients_json(const std::vector<Rational>& coefficients) {
  nlohmann::ordered_json j;
  for (std::size_t i = 0; i < coefficients.size(); ++i) j["phi" + std::to_string(i + 1)] = coefficients[i].str();
  return j.dump(2);
}

}  // namespace affmetric
