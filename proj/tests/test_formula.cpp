#include <doctest.h>

#include <random>

#include "affmetric/basis.hpp"
#include "affmetric/constructible.hpp"
#include "affmetric/evaluator.hpp"
#include "affmetric/formula.hpp"
#include "affmetric/prenex.hpp"
#include "affmetric/sexpr.hpp"
#include "affmetric/types.hpp"
#include "oracle.hpp"
#include "random_formula.hpp"

using namespace affmetric;

namespace {

std::vector<VarId> xyzw() { return {fresh_var("x"), fresh_var("y"), fresh_var("z"), fresh_var("w")}; }

// Compares the library evaluator against the reference on every type.
bool matches_oracle(const Formula& f, const std::vector<VarId>& vars, int ell) {
  for (const auto& t : oracle::patterns(static_cast<int>(vars.size()), ell))
    if (eval_type(f, vars, t, ell) != oracle::ref_eval(f, vars, t, ell)) return false;
  return true;
}

bool same_values(const Formula& f, const Formula& g, const std::vector<VarId>& vars, int ell) {
  for (const auto& t : oracle::patterns(static_cast<int>(vars.size()), ell))
    if (oracle::ref_eval(f, vars, t, ell) != oracle::ref_eval(g, vars, t, ell)) return false;
  return true;
}

}  // namespace

TEST_SUITE("formula") {
  TEST_CASE("affine canonical form") {
    VarId x = fresh_var("x"), y = fresh_var("y");
    CHECK(make_affine(0, {{0, make_dist(x, y)}})->kind() == Kind::Const);
    CHECK(make_affine(0, {{1, make_dist(x, y)}})->kind() == Kind::Dist);
    Formula nested = make_affine(1, {{2, make_affine(3, {{1, make_dist(x, y)}})}, {1, make_const(4)}});
    CHECK(nested->kind() == Kind::Affine);
    CHECK(nested->value() == Rational(11));
    REQUIRE(nested->terms().size() == 1);
    CHECK(nested->terms()[0].coef == Rational(2));
    CHECK(make_affine(0, {{1, make_dist(x, y)}, {-1, make_dist(x, y)}})->kind() != Kind::Dist);
  }

  TEST_CASE("vacuous binders are dropped") {
    VarId x = fresh_var("x"), y = fresh_var("y"), t = fresh_var("t");
    CHECK(make_inf(t, make_dist(x, y))->kind() == Kind::Dist);
    Formula q = make_sup(t, make_dist(t, x));
    CHECK(q->kind() == Kind::Sup);
    CHECK(q->free_vars() == std::vector<VarId>{x});
  }

  TEST_CASE("free variables in first-occurrence order") {
    VarId a = fresh_var("a"), b = fresh_var("b"), c = fresh_var("c");
    Formula f = add(make_dist(c, a), make_dist(b, c));
    CHECK(f->free_vars() == std::vector<VarId>{c, a, b});
  }

  TEST_CASE("alpha-equivalent formulas share a shape") {
    VarId x = fresh_var("x"), t1 = fresh_var("t"), t2 = fresh_var("t");
    Formula f = make_inf(t1, make_dist(t1, x));
    Formula g = make_inf(t2, make_dist(t2, x));
    CHECK(f->shape() == g->shape());
    CHECK(alpha_equal(f, g));
    CHECK_FALSE(alpha_equal(f, make_sup(t1, make_dist(t1, x))));
  }

  TEST_CASE("eval examples") {
    VarId x = fresh_var("x"), y = fresh_var("y");
    Valuation v;
    v.labels = {{x, 0}, {y, 0}};
    v.ell = 4;
    CHECK(eval(make_dist(x, y), v) == Rational(0));
    auto vars = xyzw();
    CHECK(eval_type(build_phi(8, vars), vars, parse_type("0123"), 4) == Rational(3));
    CHECK(eval_type(build_phi(12, vars), vars, parse_type("0010"), 4) == Rational(3));
    CHECK(oracle::ref_eval(build_phi(12, vars), vars, {0, 0, 1, 0}, 4) == Rational(3));
  }

  TEST_CASE("eval errors") {
    VarId x = fresh_var("x"), y = fresh_var("y");
    CHECK_THROWS_AS(eval_labels(make_dist(x, y), {x}, {0}, 3), EvalError);
    CHECK_THROWS_AS(eval_labels(make_dist(x, y), {x, y}, {0, 3}, 3), EvalError);
  }

  TEST_CASE("evaluator agrees with the reference on random formulas") {
    testgen::RandomFormula gen(7);
    std::vector<VarId> vars = {fresh_var("p"), fresh_var("q"), fresh_var("r")};
    for (int i = 0; i < 60; ++i) {
      Formula f = gen.make(vars, 3);
      for (int ell = 1; ell <= 5; ++ell) CHECK(matches_oracle(f, vars, ell));
    }
  }

  TEST_CASE("eval depends only on the type") {
    testgen::RandomFormula gen(11);
    std::vector<VarId> vars = {fresh_var("p"), fresh_var("q"), fresh_var("r"), fresh_var("s")};
    std::mt19937_64 rng(3);
    for (int i = 0; i < 20; ++i) {
      Formula f = gen.make(vars, 2);
      for (int trial = 0; trial < 10; ++trial) {
        std::vector<int> labels(4);
        for (auto& l : labels) l = static_cast<int>(rng() % 6);
        CHECK(eval_labels(f, vars, labels, 6) == eval_type(f, vars, type_of(labels), 6));
      }
    }
  }

  TEST_CASE("saturation: larger ell does not change values") {
    testgen::RandomFormula gen(13);
    std::vector<VarId> vars = {fresh_var("p"), fresh_var("q"), fresh_var("r")};
    for (int i = 0; i < 20; ++i) {
      Formula f = gen.make(vars, 3);
      int sat = static_cast<int>(vars.size() + bound_vars(f).size() + 1);
      for (const auto& t : enumerate_types(3, 3)) CHECK(eval_type(f, vars, t, sat) == eval_type(f, vars, t, sat + 3));
    }
  }

  TEST_CASE("substitute_vars") {
    VarId x = fresh_var("x"), y = fresh_var("y"), a = fresh_var("a"), t = fresh_var("t");
    Formula f = substitute_vars(make_dist(x, y), {{x, a}, {y, a}});
    CHECK(f->kind() == Kind::Dist);
    CHECK(f->u() == a);
    CHECK(f->v() == a);
    Formula g = substitute_vars(make_inf(t, make_dist(t, x)), {{x, y}});
    CHECK(g->bound() != t);
    CHECK(g->free_vars() == std::vector<VarId>{y});

    testgen::RandomFormula gen(17);
    std::vector<VarId> vars = {fresh_var("p"), fresh_var("q"), fresh_var("r")};
    std::vector<VarId> image = {fresh_var("u"), fresh_var("v")};
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
      Formula h = gen.make(vars, 2);
      VarMap m;
      std::vector<int> pick(3);
      for (int k = 0; k < 3; ++k) {
        pick[k] = static_cast<int>(rng() % 2);
        m[vars[k]] = image[pick[k]];
      }
      Formula s = substitute_vars(h, m);
      std::vector<int> labels = {static_cast<int>(rng() % 3), static_cast<int>(rng() % 3)};
      std::vector<int> composed = {labels[pick[0]], labels[pick[1]], labels[pick[2]]};
      CHECK(oracle::ref_eval(s, image, labels, 4) == oracle::ref_eval(h, vars, composed, 4));
    }
  }

  TEST_CASE("replace_metric") {
    auto v = xyzw();
    Formula theta2 = theta2_combination(v);
    VarId x = fresh_var("x"), y = fresh_var("y");
    VarId x1 = fresh_var("x1"), x2 = fresh_var("x2"), y1 = fresh_var("y1"), y2 = fresh_var("y2");
    Formula single = replace_metric(make_dist(x, y), theta2, v, {{x, {x1, x2}}, {y, {y1, y2}}});
    std::vector<VarId> img = {x1, x2, y1, y2};
    CHECK(single->free_vars().size() == 4);
    for (const auto& t : enumerate_types(4, 4)) CHECK(eval_type(single, img, t, 4) == Rational(eval_dn(t)));
    CHECK_THROWS(replace_metric(make_dist(x, y), theta2, v, {{x, {x1, x2}}}));

    std::vector<VarId> a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      a[i] = fresh_var("a");
      b[i] = fresh_var("b");
    }
    Formula theta4 = replace_metric(theta2, theta2, v, {{v[0], {a[0], a[1]}}, {v[1], {a[2], a[3]}},
                                                       {v[2], {b[0], b[1]}}, {v[3], {b[2], b[3]}}});
    std::vector<VarId> all = {a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]};
    for (const auto& t : enumerate_types(8, 3)) CHECK(eval_type(theta4, all, t, 3) == Rational(eval_dn(t)));
  }

  TEST_CASE("scale_flatten") {
    VarId x = fresh_var("x"), t = fresh_var("t");
    Formula f = scale_flatten(make_affine(0, {{-1, make_inf(t, make_dist(t, x))}}));
    CHECK(f->kind() == Kind::Sup);
    Formula z = scale_flatten(make_affine(0, {{0, make_dist(x, t)}}));
    CHECK(z->kind() == Kind::Const);
    CHECK(z->value() == Rational(0));
    auto v = xyzw();
    Formula th = theta2_combination(v);
    for (int ell = 2; ell <= 4; ++ell) CHECK(same_values(th, scale_flatten(th), v, ell));

    testgen::RandomFormula gen(19);
    std::vector<VarId> vars = {fresh_var("p"), fresh_var("q"), fresh_var("r")};
    for (int i = 0; i < 40; ++i) {
      Formula g = gen.make(vars, 3);
      Formula s = scale_flatten(g);
      for (int ell = 2; ell <= 4; ++ell) CHECK(same_values(g, s, vars, ell));
    }
  }

  TEST_CASE("miniscope preserves values") {
    testgen::RandomFormula gen(23);
    std::vector<VarId> vars = {fresh_var("p"), fresh_var("q"), fresh_var("r")};
    for (int i = 0; i < 40; ++i) {
      Formula g = gen.make(vars, 3);
      for (int ell = 2; ell <= 4; ++ell) CHECK(same_values(g, miniscope(g), vars, ell));
    }
  }

  TEST_CASE("bounds and denominators") {
    VarId x = fresh_var("x"), y = fresh_var("y");
    Bounds d = bounds(make_dist(x, y));
    CHECK(d.lo == Rational(0));
    CHECK(d.hi == Rational(1));
    auto v = xyzw();
    Bounds p8 = bounds(build_phi(8, v));
    CHECK(p8.lo == Rational(1));
    CHECK(p8.hi == Rational(4));
    for (const auto& t : enumerate_types(4, 4)) {
      Rational val = eval_type(build_phi(8, v), v, t, 4);
      CHECK(val >= p8.lo);
      CHECK(val <= p8.hi);
    }
    Bounds c = bounds(make_const(Rational(5, 3)));
    CHECK(c.lo == Rational(5, 3));
    CHECK(c.hi == Rational(5, 3));
    CHECK(denominator_lcm(make_affine(0, {{Rational(1, 2), make_dist(x, y)}, {Rational(1, 3), make_dist(y, x)}})) == 6);
  }

  TEST_CASE("spectrum_gap") {
    VarId x = fresh_var("x"), y = fresh_var("y");
    Spectrum s = spectrum_gap(make_dist(x, y));
    CHECK(s.values == std::vector<Rational>{0, 1});
    CHECK(s.epsilon == Rational(1));
    VarId a = fresh_var("a"), b = fresh_var("b"), c = fresh_var("c");
    Formula fu = make_affine(0, {{1, make_dist(a, c)}, {1, make_dist(b, c)}, {-1, make_dist(a, b)}});
    Spectrum u = spectrum_gap(fu);
    CHECK(u.values == std::vector<Rational>{0, 1, 2});
    CHECK(u.epsilon == Rational(1));
    auto v = xyzw();
    std::vector<VarId> xyz(v.begin(), v.begin() + 3);
    Spectrum p8 = spectrum_gap(build_phi(8, v), {}, xyz);
    CHECK(p8.values == std::vector<Rational>{1, 2, 3});
    CHECK(p8.epsilon == Rational(1));
    CHECK_THROWS_AS(spectrum_gap(make_const(3)), UndefinedGap);
    CHECK_THROWS_AS(spectrum_gap(make_dist(x, x)), UndefinedGap);
  }

  TEST_CASE("spectrum is stable above saturation") {
    testgen::RandomFormula gen(29);
    std::vector<VarId> vars = {fresh_var("p"), fresh_var("q"), fresh_var("r")};
    for (int i = 0; i < 15; ++i) {
      Formula f = gen.make(vars, 2);
      std::vector<Rational> at_sat, above;
      int sat = static_cast<int>(vars.size() + bound_vars(f).size() + 1);
      for (const auto& t : enumerate_types(3, 3)) {
        at_sat.push_back(eval_type(f, vars, t, sat));
        above.push_back(oracle::ref_eval(f, vars, t, sat + 2));
      }
      CHECK(at_sat == above);
    }
  }
}

TEST_SUITE("sexpr") {
  TEST_CASE("parse and serialize") {
    Parsed p = parse_formula("(dist x y)");
    CHECK(p.formula->kind() == Kind::Dist);
    CHECK(p.free.size() == 2);
    CHECK(var_hint(p.free[0]) == "x");
    VarId a = fresh_var("a"), x = fresh_var("x");
    Formula f = make_inf(a, make_affine(1, {{1, make_dist(a, x)}}));
    CHECK(serialize(f) == "(inf a (affine 1 (1 (dist a x))))");
    const char* text = "(sup t (affine -1/2 (2 (dist t x)) (-1 (inf u (affine 0 (1 (dist u t)) (3 (dist u y)))))))";
    CHECK(serialize(parse_formula(text).formula) == text);
  }

  TEST_CASE("round trip preserves values") {
    testgen::RandomFormula gen(31);
    std::vector<VarId> vars = {fresh_var("p"), fresh_var("q"), fresh_var("r")};
    for (int i = 0; i < 30; ++i) {
      Formula f = gen.make(vars, 3);
      std::string text = format_formula_file(f, vars);
      Parsed back = parse_formula_file(text);
      CHECK(back.free.size() == 3);
      CHECK(format_formula_file(back.formula, back.free) == text);
      for (const auto& t : enumerate_types(3, 3))
        CHECK(eval_type(back.formula, back.free, t, 4) == eval_type(f, vars, t, 4));
    }
  }

  TEST_CASE("errors carry positions") {
    CHECK_THROWS_AS(parse_formula("(dist x"), ParseError);
    CHECK_THROWS_AS(parse_formula("(foo x y)"), ParseError);
    CHECK_THROWS_AS(parse_formula("(affine 0 (0 (dist x y)))"), ParseError);
    CHECK_THROWS_AS(parse_formula("(inf t (dist x y))"), ParseError);
    CHECK_THROWS_AS(parse_formula("(dist x y) extra"), ParseError);
    try {
      parse_formula("(dist x y))");
      FAIL("no error");
    } catch (const ParseError& e) {
      CHECK(e.position() == 10);
    }
    VarId x = fresh_var("x");
    CHECK_THROWS_AS(parse_formula("(dist x y)", {x}), ParseError);
    CHECK(parse_formula("(dist x x)", {x})->u() == x);
  }

  TEST_CASE("formula files") {
    Parsed p = parse_formula_file("; comment\n; free: y x w\n(dist x y)\n");
    REQUIRE(p.free.size() == 3);
    CHECK(var_hint(p.free[0]) == "y");
    CHECK(p.formula->u() == p.free[1]);
    CHECK_THROWS_AS(parse_formula_file("; free: x\n(dist x y)"), ParseError);
    CHECK_THROWS_AS(parse_formula_file("; free: x x\n(dist x x)"), ParseError);
    Parsed plain = parse_formula_file("; nothing\n(dist b a)");
    CHECK(var_hint(plain.free[0]) == "b");
  }
}

TEST_SUITE("prenex") {
  TEST_CASE("theta2 prefix") {
    auto v = xyzw();
    PrenexForm p = to_prenex(theta2_combination(v));
    REQUIRE(p.prefix.size() == 3);
    CHECK(p.prefix[0].first == Kind::Sup);
    CHECK(p.prefix[1].first == Kind::Sup);
    CHECK(p.prefix[2].first == Kind::Inf);
    CHECK(count_alternations(p) == 1);
    CHECK(p.matrix->quantifier_count() == 0);
    Formula pf = prenex_formula(p);
    for (const auto& t : enumerate_types(4, 4))
      CHECK(oracle::ref_eval(pf, v, t, 4) == oracle::ref_eval(theta2_combination(v), v, t, 4));
  }

  TEST_CASE("quantifier-free input") {
    VarId x = fresh_var("x"), y = fresh_var("y");
    PrenexForm p = to_prenex(make_dist(x, y));
    CHECK(p.prefix.empty());
    CHECK(count_alternations(p) == 0);
    CHECK(count_alternations(PrenexForm{}) == 0);
  }

  TEST_CASE("random formulas keep their values") {
    testgen::RandomFormula gen(37);
    std::vector<VarId> vars = {fresh_var("p"), fresh_var("q"), fresh_var("r")};
    for (int i = 0; i < 40; ++i) {
      Formula f = gen.make(vars, 2);
      PrenexForm p = to_prenex(f);
      CHECK(p.matrix->quantifier_count() == 0);
      std::set<VarId> seen;
      for (const auto& q : p.prefix) CHECK(seen.insert(q.second).second);
      Formula g = prenex_formula(p);
      for (int ell = 2; ell <= 4; ++ell) CHECK(same_values(f, g, vars, ell));
      CHECK(count_alternations(to_prenex(refresh_bound(f))) == count_alternations(p));
    }
  }

  TEST_CASE("blocks") {
    auto v = xyzw();
    auto blocks = prefix_blocks(to_prenex(theta2_combination(v)));
    REQUIRE(blocks.size() == 2);
    CHECK(blocks[0] == std::make_pair(Kind::Sup, std::size_t{2}));
    CHECK(blocks[1] == std::make_pair(Kind::Inf, std::size_t{1}));
  }
}
