#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "finslerforge/finsler.hpp"

using namespace finslerforge;

namespace {

std::vector<double> pt8(double x1, double x2, double x3, double x4, double y1, double y2,
                        double y3, double y4) {
  return {x1, x2, x3, x4, y1, y2, y3, y4};
}

std::vector<double> random_pt(std::mt19937& rng) {
  std::uniform_real_distribution<double> dx(-0.8, 0.8), dy(0.4, 1.6);
  std::vector<double> p(8);
  for (int i = 0; i < 4; ++i) p[i] = dx(rng);
  for (int i = 4; i < 8; ++i) p[i] = dy(rng);
  return p;
}

}  // namespace

TEST_CASE("Hessian of the flat quadratic form") {
  Chart ch = Chart::tangent_bundle8();
  Expr F2 = parse_expr("neg(y1^2) + y2^2 + y3^2 + y4^2", ch);
  auto H = hessian_metric(F2, ch, pt8(0, 0, 0, 0, 1, 2, -1, 0.5));
  CHECK(H(0, 0) == doctest::Approx(-1.0));
  CHECK(H(1, 1) == doctest::Approx(1.0));
  CHECK(H(2, 2) == doctest::Approx(1.0));
  CHECK(H(3, 3) == doctest::Approx(1.0));
  CHECK(H(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("MDR generating function with q = 0 reduces to the base block") {
  Chart ch = Chart::tangent_bundle8();
  MdrSpec spec;
  spec.c = 2.0;
  spec.g_spatial.assign(9, Expr::constant(0.0));
  for (int i = 0; i < 3; ++i) spec.g_spatial[i * 3 + i] = Expr::constant(1.0);
  Expr f2 = finsler_from_mdr(spec, ch);
  auto H = hessian_metric(f2, ch, pt8(0.3, 0, 0, 0, 0.7, 0.4, -0.2, 0.9));
  CHECK(H(0, 0) == doctest::Approx(-4.0));  // -(c y1)^2 block
  for (int i = 1; i < 4; ++i) CHECK(H(i, i) == doctest::Approx(1.0));
  CHECK(std::abs(H(0, 1)) < 1e-14);
}

TEST_CASE("MDR spatial factor: r=1, q22=0.1 at y=(0,1,0,0)") {
  Chart ch = Chart::tangent_bundle8();
  MdrSpec spec;
  spec.g_spatial.assign(9, Expr::constant(0.0));
  for (int i = 0; i < 3; ++i) spec.g_spatial[i * 3 + i] = Expr::constant(1.0);
  spec.q.push_back({{2, 2}, 0.1});
  Expr f2 = finsler_from_mdr(spec, ch);
  double v = eval(f2, pt8(0, 0, 0, 0, 0, 1, 0, 0));
  CHECK(v == doctest::Approx(1.1).epsilon(1e-12));
}

TEST_CASE("dispersion and null condition agree to first order in q") {
  Chart ch = Chart::tangent_bundle8();
  auto build = [&](double qv) {
    MdrSpec spec;
    spec.g_spatial.assign(9, Expr::constant(0.0));
    for (int i = 0; i < 3; ++i) spec.g_spatial[i * 3 + i] = Expr::constant(1.0);
    spec.q.push_back({{2, 2}, qv});
    spec.q.push_back({{2, 3}, 0.5 * qv});
    return spec;
  };
  std::vector<double> k3 = {0.8, 0.5, 0.3};
  auto err_for = [&](double qv) {
    MdrSpec spec = build(qv);
    Expr f2 = finsler_from_mdr(spec, ch);
    // y1 from the null condition F^2 = 0 at spatial fiber k3
    std::vector<double> p = pt8(0, 0, 0, 0, 0, k3[0], k3[1], k3[2]);
    double rest = eval(f2, pt8(0, 0, 0, 0, 0, k3[0], k3[1], k3[2]));
    // F^2 = -(y1)^2 + rest  =>  y1^2 = rest  (c = 1)
    double y1sq = rest;
    MdrSpec flipped = build(-qv);
    double w2 = mdr_omega2_dispersion(flipped, {0, 0, 0, 0}, k3);
    return std::abs(w2 - y1sq);
  };
  double e1 = err_for(1e-2), e2 = err_for(1e-3);
  CHECK(e2 <= e1 * 0.02);  // quadratic suppression in q
  CHECK(e2 < 1e-6);
}

TEST_CASE("x-independent quadratic form has vanishing spray and N") {
  Chart ch = Chart::tangent_bundle8();
  Expr F2 = parse_expr("y1^2 + y2^2 + y3^2 + y4^2", ch);
  auto sd = semi_spray_and_nconnection(F2, ch, pt8(0.4, -0.2, 0.1, 0, 1, 0.5, -0.3, 2));
  for (double g : sd.G) CHECK(g == 0.0);
  for (double n : sd.N.a) CHECK(n == 0.0);
}

TEST_CASE("quadratic generating function: N is Christoffel-linear") {
  Chart ch = Chart::tangent_bundle8();
  // g = diag(1+0.3 x1^2, 1+0.1 x2^2, 1 + 0.2 x1 x2, 1)
  std::vector<std::string> diag = {"1 + 0.3*x1^2", "1 + 0.1*x2^2", "1 + 0.2*x1*x2", "1"};
  std::vector<Expr> base_g(16, Expr::constant(0.0));
  std::string f2s;
  for (int i = 0; i < 4; ++i) {
    base_g[i * 4 + i] = parse_expr(diag[i], ch);
    f2s += (i ? " + " : "") + ("(" + diag[i] + ")*y" + std::to_string(i + 1) + "^2");
  }
  Expr F2 = parse_expr(f2s, ch);
  std::mt19937 rng(5);
  for (int it = 0; it < 20; ++it) {
    auto p = random_pt(rng);
    auto sd = semi_spray_and_nconnection(F2, ch, p);
    // independent oracle: coordinate Christoffels of the base metric
    CoordMetric cm;
    cm.n = 4;
    cm.coords = {0, 1, 2, 3};
    cm.g.assign(16, ScalarField::constant(0.0));
    for (int i = 0; i < 16; ++i) cm.g[i] = ScalarField::from_expr(base_g[i]);
    auto gamma = levicivita_oracle(cm, p);
    for (int a = 0; a < 4; ++a)
      for (int j = 0; j < 4; ++j) {
        double expect = 0.0;
        for (int m = 0; m < 4; ++m) expect += gamma[(a * 4 + j) * 4 + m] * p[4 + m];
        CHECK(sd.N(a, j) == doctest::Approx(expect).epsilon(1e-9));
      }
    // 1-homogeneity of N in y
    std::vector<double> p2 = p;
    for (int i = 4; i < 8; ++i) p2[i] *= 2.0;
    auto sd2 = semi_spray_and_nconnection(F2, ch, p2);
    for (int a = 0; a < 4; ++a)
      for (int j = 0; j < 4; ++j)
        CHECK(sd2.N(a, j) == doctest::Approx(2.0 * sd.N(a, j)).epsilon(1e-9));
  }
}

TEST_CASE("quartic Hessian matches finite differences of F^2") {
  Chart ch = Chart::tangent_bundle8();
  Expr F2 = parse_expr("(y1^4 + y2^4 + y3^4 + y4^4)^0.5", ch);
  auto p = pt8(0, 0, 0, 0, 1, 1, 1, 1);
  auto H = hessian_metric(F2, ch, p);
  const double h = 1e-4;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      auto pp = p, pm = p, mp = p, mm = p;
      pp[4 + i] += h; pp[4 + j] += h;
      pm[4 + i] += h; pm[4 + j] -= h;
      mp[4 + i] -= h; mp[4 + j] += h;
      mm[4 + i] -= h; mm[4 + j] -= h;
      double fd = (eval(F2, pp) - eval(F2, pm) - eval(F2, mp) + eval(F2, mm)) / (4 * h * h);
      CHECK(std::abs(0.5 * fd - H(i, j)) < 1e-6);
    }
}

TEST_CASE("zero section is rejected for non-quadratic generating functions") {
  Chart ch = Chart::tangent_bundle8();
  Expr quartic = parse_expr("(y1^4 + y2^4 + y3^4 + y4^4)^0.5", ch);
  CHECK_THROWS_AS(hessian_metric(quartic, ch, pt8(0, 0, 0, 0, 0, 0, 0, 0)), EvalError);
  Expr quad = parse_expr("y1^2 + y2^2 + y3^2 + y4^2", ch);
  CHECK_NOTHROW(hessian_metric(quad, ch, pt8(0.3, 0, 0, 0, 0, 0, 0, 0)));
}

TEST_CASE("Euler identity and Hessian 0-homogeneity for homogeneous F") {
  Chart ch = Chart::tangent_bundle8();
  std::vector<Expr> families = {
      parse_expr("(y1^4 + y2^4 + y3^4 + y4^4)^0.5", ch),
      parse_expr("(sqrt(y1^2 + y2^2 + y3^2 + y4^2) + 0.1*y1)^2", ch),
  };
  {
    MdrSpec spec;
    spec.g_spatial.assign(9, Expr::constant(0.0));
    for (int i = 0; i < 3; ++i) spec.g_spatial[i * 3 + i] = Expr::constant(1.0);
    spec.q.push_back({{2, 2}, 0.05});
    families.push_back(finsler_from_mdr(spec, ch));
  }
  std::mt19937 rng(17);
  for (const Expr& F2 : families) {
    for (int it = 0; it < 10; ++it) {
      auto p = random_pt(rng);
      Jet j = eval_jet(F2, p, 1, {4, 5, 6, 7});
      double euler = 0.0;
      for (int a = 0; a < 4; ++a) euler += p[4 + a] * j.deriv({4 + a});
      CHECK(std::abs(euler - 2.0 * j.value()) < 1e-9 * std::max(1.0, std::abs(j.value())));
      auto H = hessian_metric(F2, ch, p);
      for (double beta : {0.5, 2.0, 7.0}) {
        auto pb = p;
        for (int a = 4; a < 8; ++a) pb[a] *= beta;
        auto Hb = hessian_metric(F2, ch, pb);
        for (int i = 0; i < 4; ++i)
          for (int jj = 0; jj < 4; ++jj)
            CHECK(std::abs(Hb(i, jj) - H(i, jj)) < 1e-9 * std::max(1.0, std::abs(H(i, jj))));
      }
    }
  }
}

TEST_CASE("frames: flat N gives no anholonomy; antisymmetry and FD check") {
  Chart ch = Chart::tangent_bundle8();
  Expr F2flat = parse_expr("y1^2 + y2^2 + y3^2 + y4^2", ch);
  DMetric dmflat = dmetric_from_finsler(F2flat, ch);
  auto fd0 = nonholonomic_frames(dmflat, pt8(0.1, 0.2, 0, 0, 1, 0.4, 0.2, 0.8));
  for (double w : fd0.W) CHECK(w == 0.0);
  for (double o : fd0.Omega) CHECK(o == 0.0);

  Expr F2 = parse_expr("(1 + 0.3*x1^2)*y1^2 + y2^2 + (1 + 0.1*x2^2)*y3^2 + x1*y1*y4 + y4^2", ch);
  DMetric dm = dmetric_from_finsler(F2, ch);
  std::mt19937 rng(3);
  auto p = random_pt(rng);
  auto fd = nonholonomic_frames(dm, p);
  for (int a = 0; a < 4; ++a)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        CHECK(fd.Om(a, i, j) == doctest::Approx(-fd.Om(a, j, i)).epsilon(1e-12));
  // W^b_{ia} vs finite differences of the canonical N in y^a
  const double h = 1e-5;
  auto sd = semi_spray_and_nconnection(F2, ch, p);
  for (int b = 0; b < 4; ++b)
    for (int i = 0; i < 4; ++i)
      for (int a = 0; a < 4; ++a) {
        auto pp = p, pm = p;
        pp[4 + a] += h;
        pm[4 + a] -= h;
        double fdv = (semi_spray_and_nconnection(F2, ch, pp).N(b, i) -
                      semi_spray_and_nconnection(F2, ch, pm).N(b, i)) /
                     (2 * h);
        CHECK(std::abs(fd.Wm(b, i, a) - fdv) < 1e-5 * std::max(1.0, std::abs(fdv)));
      }
}

TEST_CASE("Sasaki assembly: block form, determinant, congruence") {
  Chart ch = Chart::tangent_bundle8();
  Expr F2 = parse_expr("(1 + 0.2*x1^2)*y1^2 + (1 + 0.1*x2^2)*y2^2 + y3^2 + y4^2", ch);
  double lstar = 1.7;
  DMetric dm = dmetric_from_finsler(F2, ch, lstar);
  std::mt19937 rng(23);
  for (int it = 0; it < 5; ++it) {
    auto p = random_pt(rng);
    auto M = sasaki_assemble(dm, p);
    // symmetry
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) CHECK(M(i, j) == doctest::Approx(M(j, i)).epsilon(1e-12));
    // det factorization
    MetricValues mv = metric_values(dm, p);
    double detg = mat_det(mv.g), deth = mat_det(mv.h);
    CHECK(mat_det(M) == doctest::Approx(detg * deth).epsilon(1e-8));
    // congruence with the explicit vielbein E^a = dy^a + N^a_i dx^i
    Mat<double> E(8, 8, 0.0);
    for (int i = 0; i < 8; ++i) E(i, i) = 1.0;
    for (int a = 0; a < 4; ++a)
      for (int i = 0; i < 4; ++i) E(4 + a, i) = mv.N(a, i);
    Mat<double> D(8, 8, 0.0);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        D(i, j) = mv.g(i, j);
        D(4 + i, 4 + j) = mv.h(i, j);
      }
    Mat<double> C = mat_mul(mat_transpose(E), mat_mul(D, E));
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) CHECK(std::abs(C(i, j) - M(i, j)) < 1e-10);
  }
  // N = 0: block diagonal
  Expr F2f = parse_expr("y1^2 + 2*y2^2 + y3^2 + y4^2", ch);
  DMetric dmf = dmetric_from_finsler(F2f, ch, lstar);
  auto M = sasaki_assemble(dmf, pt8(0, 0, 0, 0, 1, 1, 1, 1));
  for (int i = 0; i < 4; ++i)
    for (int a = 0; a < 4; ++a) CHECK(M(i, 4 + a) == 0.0);
  CHECK(M(5, 5) == doctest::Approx(lstar * lstar * 2.0));
}

TEST_CASE("geodesics: straight lines in the flat case") {
  Chart ch = Chart::tangent_bundle8();
  Expr F2 = parse_expr("y1^2 + y2^2 + y3^2 + y4^2", ch);
  std::vector<double> x0 = {0.1, -0.2, 0.3, 0.0}, y0 = {0.5, 1.0, -0.2, 0.3};
  auto traj = geodesic_integrate(F2, ch, x0, y0, 2.0, 1e-2, 50);
  const auto& last = traj.back();
  for (int i = 0; i < 4; ++i) {
    CHECK(last.x[i] == doctest::Approx(x0[i] + 2.0 * y0[i]).epsilon(1e-12));
    CHECK(last.y[i] == doctest::Approx(y0[i]).epsilon(1e-12));
  }
}

TEST_CASE("geodesics: the Lagrangian is conserved along the flow") {
  Chart ch = Chart::tangent_bundle8();
  Expr F2 = parse_expr("(y1^4 + y2^4 + y3^4 + 0.5*y1^2*y2^2 + y4^4)^0.5", ch);
  std::vector<double> x0 = {0, 0, 0, 0}, y0 = {1.0, 0.7, 0.4, 0.8};
  std::vector<double> p0 = {x0[0], x0[1], x0[2], x0[3], y0[0], y0[1], y0[2], y0[3]};
  double L0 = eval(F2, p0);
  auto traj = geodesic_integrate(F2, ch, x0, y0, 10.0, 1e-3, 1000);
  for (const auto& s : traj) {
    std::vector<double> p = {s.x[0], s.x[1], s.x[2], s.x[3], s.y[0], s.y[1], s.y[2], s.y[3]};
    CHECK(std::abs(eval(F2, p) - L0) < 1e-6);
  }
}

TEST_CASE("geodesic integration reports degeneracy with the parameter value") {
  Chart ch = Chart::tangent_bundle8();
  // base coefficient crosses zero along the trajectory
  Expr F2 = parse_expr("(1 - 2*x1)*y1^2 + y2^2 + y3^2 + y4^2", ch);
  std::vector<double> x0 = {0, 0, 0, 0}, y0 = {1, 0, 0, 0};
  try {
    geodesic_integrate(F2, ch, x0, y0, 2.0, 0.05);
    FAIL("expected a degeneracy error");
  } catch (const EvalError& e) {
    CHECK(std::string(e.what()).find("tau") != std::string::npos);
  }
}

TEST_CASE("metric signature is recorded and constant across points") {
  Chart ch = Chart::tangent_bundle8();
  MdrSpec spec;
  spec.c = 1.0;
  spec.g_spatial.assign(9, Expr::constant(0.0));
  for (int i = 0; i < 3; ++i) spec.g_spatial[i * 3 + i] = Expr::constant(1.0);
  spec.q.push_back({{2, 2}, 0.05});
  Expr f2 = finsler_from_mdr(spec, ch);
  std::mt19937 rng(83);
  auto first = metric_signature(hessian_metric(f2, ch, random_pt(rng)));
  CHECK(first.first == 3);
  CHECK(first.second == 1);
  for (int it = 0; it < 10; ++it)
    CHECK(metric_signature(hessian_metric(f2, ch, random_pt(rng))) == first);
}

TEST_CASE("geodesics: great circles close after one period") {
  Chart ch = Chart::tangent_bundle8();
  // round unit sphere in (x1, x2), flat factors
  Expr F2 = parse_expr("y1^2 + sin(x1)^2*y2^2 + y3^2 + y4^2", ch);
  double theta0 = 1.5707963267948966;  // pi/2
  double tilt = 0.5;
  std::vector<double> x0 = {theta0, 0.0, 0.0, 0.0};
  std::vector<double> y0 = {std::sin(tilt), std::cos(tilt), 0.0, 0.0};
  double period = 2.0 * M_PI;
  double step = period / 6400.0;  // divides the period exactly
  auto traj = geodesic_integrate(F2, ch, x0, y0, period, step, 100000);
  const auto& last = traj.back();
  CHECK(std::abs(last.x[0] - theta0) < 1e-4);
  CHECK(std::abs(last.x[1] - 2.0 * M_PI) < 1e-4);
  CHECK(std::abs(last.y[0] - y0[0]) < 1e-4);
  CHECK(std::abs(last.y[1] - y0[1]) < 1e-4);
}
