#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "finslerforge/expr.hpp"

using namespace finslerforge;

namespace {

std::vector<double> random_point(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> d(0.3, 1.7);
  std::vector<double> p(n);
  for (auto& x : p) x = d(rng);
  return p;
}

}  // namespace

TEST_CASE("grammar examples") {
  Chart ch = Chart::tangent_bundle8();
  Expr e = parse_expr("y1^2 + y2^2", ch);
  const ExprNode* r = e.root().get();
  REQUIRE(r->op == Op::Add);
  CHECK(r->a->op == Op::Pow);
  CHECK(r->a->a->op == Op::Var);
  CHECK(r->a->a->var == ch.index_of("y1"));
  CHECK(r->b->op == Op::Pow);
  CHECK(r->b->a->var == ch.index_of("y2"));
}

TEST_CASE("syntax error carries the byte offset") {
  Chart ch = Chart::tangent_bundle8();
  try {
    parse_expr("y1 +", ch);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
}

TEST_CASE("undeclared identifiers are rejected by name") {
  Chart ch = Chart::tangent_bundle8();
  try {
    parse_expr("x1 + q7", ch);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("q7") != std::string::npos);
  }
}

TEST_CASE("aliases: v, y1..y4 resolve on the 8-d chart") {
  Chart ch = Chart::tangent_bundle8();
  CHECK(ch.index_of("v") == 2);
  CHECK(ch.index_of("y1") == 4);
  CHECK(ch.index_of("y4") == 7);
  Expr a = parse_expr("v + y1", ch);
  Expr b = parse_expr("x3 + y5", ch);
  CHECK(a.same_structure(b));
}

TEST_CASE("print/parse round trip is structurally exact on 1000 random trees") {
  Chart ch = Chart::tangent_bundle8();
  std::mt19937 rng(20260811);
  int checked = 0;
  for (int it = 0; it < 1000; ++it) {
    Expr e = random_expr(rng, ch, 4, it % 2 == 0);
    std::string s = to_string(e, ch);
    Expr re = parse_expr(s, ch);
    CHECK(re.same_structure(e));
    // and printing again reproduces the same text
    CHECK(to_string(re, ch) == s);
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("hand-checked jet evaluations") {
  Chart ch = Chart::tangent_bundle8();
  std::vector<double> p(8, 0.0);
  p[ch.index_of("x1")] = 2.0;
  p[ch.index_of("y1")] = 3.0;

  Expr e = parse_expr("x1*y1^2", ch);
  Jet j = eval_jet(e, p, 3, {0, 4});
  CHECK(j.value() == 18.0);
  CHECK(j.deriv({4, 4}) == doctest::Approx(4.0));
  CHECK(j.deriv({0, 4, 4}) == doctest::Approx(2.0));

  Expr c = parse_expr("5", ch);
  Jet jc = eval_jet(c, p, 2, {0, 1, 4});
  CHECK(jc.value() == 5.0);
  for (int r = 1; r < jc.space()->size(); ++r) CHECK(jc.coeff(r) == 0.0);
}

TEST_CASE("evaluation domain errors report the offending node") {
  Chart ch = Chart::tangent_bundle8();
  std::vector<double> p(8, 0.0);
  p[0] = -2.0;
  Expr e = parse_expr("x2 + log(x1)", ch);
  try {
    eval_jet(e, p, 1, {0});
    FAIL("expected an evaluation error");
  } catch (const EvalError& err) {
    CHECK(err.offset() == 5);
    CHECK(std::string(err.what()).find("log") != std::string::npos);
  }
  Expr d = parse_expr("x2/x1", ch);
  p[0] = 0.0;
  CHECK_THROWS_AS(eval(d, p), EvalError);
}

TEST_CASE("jet order is capped at 4 for the public API") {
  Chart ch = Chart::tangent_bundle8();
  Expr e = parse_expr("x1^2", ch);
  std::vector<double> p(8, 1.0);
  CHECK_THROWS_AS(eval_jet(e, p, 5, {0}), std::invalid_argument);
  CHECK_NOTHROW(eval_jet_unchecked(e, p, 5, {0}));
}

TEST_CASE("AD matches central finite differences on random polynomial trees") {
  Chart ch = Chart::tangent_bundle8();
  std::mt19937 rng(42);
  const double h = 1e-4;
  int done = 0;
  for (int it = 0; it < 500; ++it) {
    Expr e = random_expr(rng, ch, 3, true);
    auto vars = e.variables();
    if (vars.empty()) continue;
    std::vector<double> p = random_point(rng, 8);
    Jet j = eval_jet(e, p, 2, vars);
    auto feval = [&](const std::vector<double>& q) { return eval(e, q); };
    for (int v : vars) {
      std::vector<double> pp = p, pm = p;
      pp[v] += h;
      pm[v] -= h;
      double fd1 = (feval(pp) - feval(pm)) / (2 * h);
      double ad1 = j.deriv({v});
      CHECK(std::abs(ad1 - fd1) <= 1e-5 * std::max(1.0, std::abs(ad1)));
      double fd2 = (feval(pp) - 2 * feval(p) + feval(pm)) / (h * h);
      double ad2 = j.deriv({v, v});
      CHECK(std::abs(ad2 - fd2) <= 1e-5 * std::max(1.0, std::abs(ad2)));
    }
    // one mixed partial per tree
    if (vars.size() >= 2) {
      int a = vars[0], b = vars[1];
      std::vector<double> ppp = p, ppm = p, pmp = p, pmm = p;
      ppp[a] += h; ppp[b] += h;
      ppm[a] += h; ppm[b] -= h;
      pmp[a] -= h; pmp[b] += h;
      pmm[a] -= h; pmm[b] -= h;
      double fd = (feval(ppp) - feval(ppm) - feval(pmp) + feval(pmm)) / (4 * h * h);
      double ad = j.deriv({a, b});
      CHECK(std::abs(ad - fd) <= 1e-5 * std::max(1.0, std::abs(ad)));
    }
    ++done;
  }
  CHECK(done > 400);
}
