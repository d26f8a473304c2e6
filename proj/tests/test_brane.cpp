#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "finslerforge/brane.hpp"

using namespace finslerforge;

TEST_CASE("profile construction and boundary identities") {
  BraneProfile p = brane_profile(1.2, 0.9, 2, 1.0, false, 0.4);
  CHECK(p.eps * p.eps * 3.0 * 0.9 == doctest::Approx(40.0 * std::pow(1.2, 4)).epsilon(1e-12));
  CHECK(std::abs(p.phi2(0.0) - 1.0) <= 1e-15);
  CHECK(std::abs(p.lhbar(0.0) - 1.0) <= 1e-15);
  // asymptotics: phi^2 -> a
  CHECK(p.phi2(1e8) == doctest::Approx(0.4).epsilon(1e-10));
  CHECK_THROWS_AS(brane_profile(-1.0, 1.0, 2, 1.0, false, 1.0), DomainError);
  CHECK_THROWS_AS(brane_profile(1.0, 1.0, 1, 1.0, false, 1.0), std::invalid_argument);
}

TEST_CASE("source polynomials are even in y5") {
  BraneProfile p = brane_profile(1.0, 1.2, 3, 0.8, false, 0.5);
  for (double s : {0.3, 1.7, 4.2}) {
    CHECK(p.K1M(s) == p.K1M(-s));
    CHECK(p.K2M(s) == p.K2M(-s));
    CHECK(p.phi2(s) == p.phi2(-s));
  }
}

TEST_CASE("conservation residual is measured and reported") {
  BraneProfile p = brane_profile(1.0, 1.0, 2, 1.0, false, 0.5);
  auto rep = brane_sources_and_conservation(p, -5.0 * p.eps, 5.0 * p.eps, 41);
  CHECK(rep.samples.size() == 41);
  for (const auto& s : rep.samples) {
    CHECK(std::isfinite(s.cons_residual));
    CHECK(std::isfinite(s.K1M));
    CHECK(std::isfinite(s.K2M));
  }
  CHECK(rep.max_cons_residual >= 0.0);
  // the source assembly is definitional: Upsilon = Lambda - K1M
  for (const auto& s : rep.samples) {
    double ups = p.Lambda - s.K1M;
    CHECK(std::isfinite(ups));
  }
}

TEST_CASE("second-derivative condition at the brane edge") {
  // the curvature of phi at s = eps vanishes only on the trivial branch
  BraneProfile p = brane_profile(1.0, 1.0, 2, 1.0, true, 0.0);
  CHECK(std::isfinite(p.a));
  // verify the found root satisfies the condition
  BraneProfile q = p;
  auto phi_dd = [&](double a) {
    BraneProfile r = q;
    r.a = a;
    auto sp = JetSpace::get({0}, 2);
    Jet s = Jet::variable(sp, 0, r.eps);
    double e2 = r.eps * r.eps;
    Jet u = (3.0 * e2 + r.a * s * s) / (3.0 * e2 + s * s);
    return sqrt(u).deriv({0, 0});
  };
  CHECK(std::abs(phi_dd(p.a)) < 1e-10);
}

TEST_CASE("diagonal reduction of the assembled brane metric") {
  Chart ch = Chart::tangent_bundle8();
  BraneProfile p = brane_profile(1.0, 1.0, 2, 1.0, false, 0.5);
  // ansatz realizing the diagonal profile through the off-diagonal formula
  auto phi2f = ScalarField::from_fn(
      [p](const std::vector<double>& q, const std::vector<int>& wrt, int order) {
        auto sp = JetSpace::get(wrt, order);
        return Jet::constant(sp, p.phi2(q[4]));
      });
  ShellAnsatz a;
  a.g1 = phi2f;
  a.g2 = -1.0 * phi2f;
  a.h3 = -1.0 * phi2f;
  a.h4 = -1.0 * phi2f;
  a.h5 = a.h6 = a.h7 = a.h8 = ScalarField::constant(0.0);
  for (auto& f : a.w) f = ScalarField::constant(0.0);
  for (auto& f : a.n) f = ScalarField::constant(0.0);
  for (auto& f : a.w1) f = ScalarField::constant(0.0);
  for (auto& f : a.n1) f = ScalarField::constant(0.0);
  for (auto& f : a.w2) f = ScalarField::constant(0.0);
  for (auto& f : a.n2) f = ScalarField::constant(0.0);
  std::array<ScalarField, 4> qh;
  for (auto& f : qh) f = phi2f * ScalarField::constant(-1.0);

  std::vector<double> pt(8, 0.0);
  pt[4] = 0.7;
  Mat<double> M = assemble_brane_metric(a, p, qh, pt);
  Mat<double> D = diagonal_profile_metric(p, +1, +1, 0.7);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) CHECK(M(i, j) == doctest::Approx(D(i, j)).epsilon(1e-12));
}

TEST_CASE("off-diagonal assembly is a congruence of the block metric") {
  Chart ch = Chart::tangent_bundle8();
  BraneProfile p = brane_profile(1.1, 0.8, 2, 1.0, false, 0.6);
  auto X = [&](const std::string& s) { return ScalarField::from_expr(parse_expr(s, ch)); };
  ShellAnsatz a;
  a.g1 = X("1 + 0.2*x1^2");
  a.g2 = X("1.1 + 0.1*x2^2");
  a.h3 = X("1 + 0.1*v");
  a.h4 = X("0.9 + 0.2*v^2");
  a.h5 = a.h6 = a.h7 = a.h8 = ScalarField::constant(0.0);
  a.w = {X("0.3*x1*v"), X("0.2*x2")};
  a.n = {X("0.1*v"), X("0.15*x1")};
  a.w1 = {X("0.2*x1"), X("0.1*v"), ScalarField::constant(0), ScalarField::constant(0)};
  a.n1 = {X("0.05*x2"), X("0.12*x1"), ScalarField::constant(0), ScalarField::constant(0)};
  a.w2 = {X("0.07*x2"), X("0.09*x1"), ScalarField::constant(0), ScalarField::constant(0),
          ScalarField::constant(0), ScalarField::constant(0)};
  a.n2 = {X("0.11*x1"), X("0.03*x2"), ScalarField::constant(0), ScalarField::constant(0),
          ScalarField::constant(0), ScalarField::constant(0)};
  std::array<ScalarField, 4> qh = {X("1 + 0.1*y5"), X("1.2 + 0.05*y5^2"), X("0.9 + 0.04*y7"),
                                   X("1.05 + 0.03*v")};

  std::mt19937 rng(97);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (int it = 0; it < 20; ++it) {
    std::vector<double> pt = {d(rng), d(rng), d(rng), 0, d(rng) + 0.6, 0, d(rng) + 0.5, 0};
    Mat<double> M = assemble_brane_metric(a, p, qh, pt);
    // symmetry
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) CHECK(M(i, j) == doctest::Approx(M(j, i)).epsilon(1e-12));
    // independent congruence: E^T D E with dx-legged one-forms
    double warp = p.hbar_l2(pt[4]) / p.phi2(pt[4]);
    double diag[8] = {a.g1.value(pt), a.g2.value(pt), a.h3.value(pt), a.h4.value(pt),
                      warp * qh[0].value(pt), warp * qh[1].value(pt), warp * qh[2].value(pt),
                      warp * qh[3].value(pt)};
    Mat<double> E(8, 8, 0.0);
    for (int i = 0; i < 8; ++i) E(i, i) = 1.0;
    const ScalarField* forms[6] = {a.w.data(), a.n.data(), a.w1.data(), a.n1.data(),
                                   a.w2.data(), a.n2.data()};
    for (int blk = 0; blk < 6; ++blk)
      for (int i = 0; i < 2; ++i) E(2 + blk, i) = forms[blk][i].value(pt);
    Mat<double> D(8, 8, 0.0);
    for (int i = 0; i < 8; ++i) D(i, i) = diag[i];
    Mat<double> Cg = mat_mul(mat_transpose(E), mat_mul(D, E));
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) CHECK(std::abs(Cg(i, j) - M(i, j)) < 1e-10);
    // the warp factor multiplies exactly the deep-shell bracket of B11
    double b11_lv = M(0, 0) - (a.g1.value(pt) + a.w[0].value(pt) * a.w[0].value(pt) * diag[2] +
                               a.n[0].value(pt) * a.n[0].value(pt) * diag[3]);
    double bracket = a.w1[0].value(pt) * a.w1[0].value(pt) * qh[0].value(pt) +
                     a.n1[0].value(pt) * a.n1[0].value(pt) * qh[1].value(pt) +
                     a.w2[0].value(pt) * a.w2[0].value(pt) * qh[2].value(pt) +
                     a.n2[0].value(pt) * a.n2[0].value(pt) * qh[3].value(pt);
    CHECK(b11_lv == doctest::Approx(warp * bracket).epsilon(1e-10));
  }
}
