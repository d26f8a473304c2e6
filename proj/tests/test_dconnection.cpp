#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "finslerforge/finsler.hpp"

using namespace finslerforge;

namespace {

std::vector<double> random_pt(std::mt19937& rng) {
  std::uniform_real_distribution<double> dx(-0.8, 0.8), dy(0.4, 1.6);
  std::vector<double> p(8);
  for (int i = 0; i < 4; ++i) p[i] = dx(rng);
  for (int i = 4; i < 8; ++i) p[i] = dy(rng);
  return p;
}

/// A 2+2 d-metric with fully general symmetric fiber-dependent blocks;
/// exercises every term of the connection/distortion formulas.
DMetric general_22(const Chart& ch) {
  DMetric dm = DMetric::make(ch, {0, 1}, {2, 3});
  auto F = [&](const char* s) { return ScalarField::from_expr(parse_expr(s, ch)); };
  dm.gf(0, 0) = F("1.2 + 0.2*x1^2 + 0.1*x3 + 0.05*sin(x4)");
  dm.gf(0, 1) = F("0.1*x1*x3 + 0.05*x2");
  dm.gf(1, 0) = dm.gf(0, 1);
  dm.gf(1, 1) = F("1.4 + 0.1*x2^2 + 0.07*x3^2");
  dm.hf(0, 0) = F("1.1 + 0.15*x3^2 + 0.1*x1 + 0.05*x4^2");
  dm.hf(0, 1) = F("0.08*x2*x3 + 0.03*x4");
  dm.hf(1, 0) = dm.hf(0, 1);
  dm.hf(1, 1) = F("0.9 + 0.1*x3 + 0.06*x2^2");
  dm.Nf(0, 0) = F("0.2*x1*x3 + 0.1*x4");
  dm.Nf(0, 1) = F("0.1*x2 + 0.05*x3^2");
  dm.Nf(1, 0) = F("0.1*x3^2 + 0.2*x1");
  dm.Nf(1, 1) = F("0.05*x1*x3 + 0.07*x4^2");
  return dm;
}

double frame_gamma(const DConnection& dc, int u, int o, int d, int nb) {
  if (u < nb && o < nb && d < nb) return dc.Lh(u, o, d);
  if (u >= nb && o >= nb && d < nb) return dc.Lv(u - nb, o - nb, d);
  if (u < nb && o < nb && d >= nb) return dc.Ch(u, o, d - nb);
  if (u >= nb && o >= nb && d >= nb) return dc.Cv(u - nb, o - nb, d - nb);
  return 0.0;
}

double distortion_identity_error(const DMetric& dm, const std::vector<double>& p) {
  const int nb = dm.nb(), n = dm.dim();
  auto dc = canonical_dconnection(dm, p);
  auto td = torsion_and_distortion(dm, p);
  auto cm = assemble_coordinate_metric(dm);
  auto lc = levicivita_oracle(cm, p);
  auto lcf = frame_transform_connection(dm, lc, p);
  double worst = 0.0;
  for (int u = 0; u < n; ++u)
    for (int o = 0; o < n; ++o)
      for (int d = 0; d < n; ++d) {
        double diff = lcf[(u * n + o) * n + d] -
                      (frame_gamma(dc, u, o, d, nb) + td.distortion.z(u, o, d));
        worst = std::max(worst, std::abs(diff));
      }
  return worst;
}

}  // namespace

TEST_CASE("canonical connection of a quadratic form reduces to base Christoffels") {
  Chart ch = Chart::tangent_bundle8();
  std::vector<std::string> diag = {"1 + 0.3*x1^2", "1 + 0.1*x2^2", "1 + 0.2*x1*x2", "1"};
  std::vector<Expr> base_g(16, Expr::constant(0.0));
  for (int i = 0; i < 4; ++i) base_g[i * 4 + i] = parse_expr(diag[i], ch);
  DMetric dm = dmetric_from_quadratic(base_g, ch);
  CoordMetric cm;
  cm.n = 4;
  cm.coords = {0, 1, 2, 3};
  cm.g.assign(16, ScalarField::constant(0.0));
  for (int i = 0; i < 16; ++i) cm.g[i] = ScalarField::from_expr(base_g[i]);
  std::mt19937 rng(31);
  for (int it = 0; it < 10; ++it) {
    auto p = random_pt(rng);
    auto dc = canonical_dconnection(dm, p);
    auto gamma = levicivita_oracle(cm, p);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          CHECK(std::abs(dc.Lh(i, j, k) - gamma[(i * 4 + j) * 4 + k]) < 1e-8);
    // g independent of y: no vertical derivative coefficients
    for (double c : dc.C_h) CHECK(std::abs(c) < 1e-12);
    // formula symmetries
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          CHECK(dc.Lh(i, j, k) == doctest::Approx(dc.Lh(i, k, j)).epsilon(1e-12));
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          CHECK(dc.Cv(a, b, c) == doctest::Approx(dc.Cv(a, c, b)).epsilon(1e-12));
  }
}

TEST_CASE("torsion: pure blocks vanish, mixed block equals -Omega") {
  Chart ch = Chart::tangent_bundle8();
  DMetric dm = general_22(ch);
  std::mt19937 rng(37);
  for (int it = 0; it < 5; ++it) {
    std::vector<double> p = {0.2 * it - 0.3, 0.1 + 0.05 * it, 0.4 - 0.1 * it, 0.2, 0, 0, 0, 0};
    auto td = torsion_and_distortion(dm, p);
    for (double t : td.torsion.T_hhh) CHECK(std::abs(t) < 1e-12);
    for (double t : td.torsion.T_vvv) CHECK(std::abs(t) < 1e-12);
    auto fd = nonholonomic_frames(dm, p);
    for (int a = 0; a < 2; ++a)
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i)
          CHECK(td.torsion.T_vhh[(a * 2 + j) * 2 + i] ==
                doctest::Approx(-fd.Om(a, j, i)).epsilon(1e-12));
  }
}

TEST_CASE("distortion reproduces the Levi-Civita connection (general blocks)") {
  Chart ch = Chart::tangent_bundle8();
  DMetric dm = general_22(ch);
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (int it = 0; it < 10; ++it) {
    std::vector<double> p = {d(rng), d(rng), d(rng), d(rng), 0, 0, 0, 0};
    CHECK(distortion_identity_error(dm, p) < 1e-10);
  }
}

TEST_CASE("distortion identity for a genuinely Finsler (quartic) metric") {
  Chart ch = Chart::tangent_bundle8();
  Expr F2 = parse_expr(
      "(1 + 0.2*x1^2)*y1^2 + y2^2 + (1 + 0.1*x2^2)*y3^2 + y4^2 + 0.1*(y1^4 + y2^4)/(y1^2 + y2^2 + y3^2 + y4^2)",
      ch);
  DMetric dm = dmetric_from_finsler(F2, ch, 1.3);
  std::mt19937 rng(43);
  for (int it = 0; it < 3; ++it) {
    auto p = random_pt(rng);
    CHECK(distortion_identity_error(dm, p) < 1e-6);
  }
}

TEST_CASE("Levi-Civita oracle: constant metric, symmetry, metricity") {
  Chart ch = Chart::tangent_bundle8();
  CoordMetric cm;
  cm.n = 3;
  cm.coords = {0, 1, 2};
  cm.g.assign(9, ScalarField::constant(0.0));
  cm.g[0] = ScalarField::constant(2.0);
  cm.g[4] = ScalarField::constant(1.5);
  cm.g[8] = ScalarField::constant(1.0);
  std::vector<double> p(8, 0.3);
  auto gamma = levicivita_oracle(cm, p);
  for (double g : gamma) CHECK(g == 0.0);

  CoordMetric cv;
  cv.n = 3;
  cv.coords = {0, 1, 2};
  cv.g.assign(9, ScalarField::constant(0.0));
  cv.g[0] = ScalarField::from_expr(parse_expr("1 + 0.2*x1^2 + 0.1*x2", ch));
  cv.g[1] = ScalarField::from_expr(parse_expr("0.1*x1*x3", ch));
  cv.g[3] = cv.g[1];
  cv.g[4] = ScalarField::from_expr(parse_expr("1.3 + 0.1*x3^2", ch));
  cv.g[5] = ScalarField::from_expr(parse_expr("0.05*x2", ch));
  cv.g[7] = cv.g[5];
  cv.g[8] = ScalarField::from_expr(parse_expr("0.9 + 0.15*x1^2", ch));
  std::mt19937 rng(47);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (int it = 0; it < 10; ++it) {
    std::vector<double> q = {d(rng), d(rng), d(rng), 0, 0, 0, 0, 0};
    auto ga = levicivita_oracle(cv, q);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
          CHECK(ga[(a * 3 + b) * 3 + c] == doctest::Approx(ga[(a * 3 + c) * 3 + b]).epsilon(1e-12));
    // metricity: covariant derivative of g vanishes
    std::vector<int> vars = {0, 1, 2};
    for (int mu = 0; mu < 3; ++mu)
      for (int al = 0; al < 3; ++al)
        for (int be = 0; be < 3; ++be) {
          double cov = cv.at(al, be).jet(q, vars, 1).deriv({mu});
          for (int s = 0; s < 3; ++s) {
            cov -= ga[(s * 3 + al) * 3 + mu] * cv.at(s, be).value(q);
            cov -= ga[(s * 3 + be) * 3 + mu] * cv.at(al, s).value(q);
          }
          CHECK(std::abs(cov) < 1e-8);
        }
  }
}

TEST_CASE("curvature: flat data vanish, antisymmetry holds") {
  Chart ch = Chart::tangent_bundle8();
  Expr F2 = parse_expr("y1^2 + y2^2 + y3^2 + y4^2", ch);
  DMetric dm = dmetric_from_finsler(F2, ch);
  std::vector<double> p = {0.2, -0.1, 0.4, 0.1, 1.0, 0.5, -0.3, 0.8};
  auto cp = curvature_and_ricci(dm, p);
  for (double r : cp.R) CHECK(r == 0.0);
  for (double r : cp.ricci.a) CHECK(r == 0.0);
  for (double e : cp.einstein.a) CHECK(e == 0.0);

  DMetric gen = general_22(ch);
  std::vector<double> q = {0.2, -0.1, 0.3, 0.15, 0, 0, 0, 0};
  auto cg = curvature_and_ricci(gen, q);
  const int n = 4;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d2 = 0; d2 < n; ++d2)
          CHECK(cg.r(a, b, c, d2) == doctest::Approx(-cg.r(a, b, d2, c)).epsilon(1e-12));
  CHECK(cg.scalar == doctest::Approx(cg.hscalar + cg.vscalar).epsilon(1e-12));
}

TEST_CASE("sphere base block: horizontal scalar curvature is 2/rho^2") {
  Chart ch = Chart::tangent_bundle8();
  double rho = 1.7;
  std::vector<Expr> base_g(16, Expr::constant(0.0));
  base_g[0] = Expr::constant(rho * rho);
  base_g[5] = Expr::binary(Op::Mul, Expr::constant(rho * rho),
                           Expr::pow(Expr::unary(Op::Sin, Expr::var(0)), 2.0));
  base_g[10] = Expr::constant(1.0);
  base_g[15] = Expr::constant(1.0);
  DMetric dm = dmetric_from_quadratic(base_g, ch);
  std::vector<double> p = {1.1, 0.4, 0.2, -0.3, 0.8, 0.5, 1.2, 0.7};
  auto cp = curvature_and_ricci(dm, p);
  CHECK(cp.hscalar == doctest::Approx(2.0 / (rho * rho)).epsilon(1e-6));
  CHECK(std::abs(cp.vscalar) < 1e-8);
}

TEST_CASE("metric compatibility: exact for canonical, detects perturbations") {
  Chart ch = Chart::tangent_bundle8();
  DMetric gen = general_22(ch);
  std::vector<double> p = {0.25, -0.2, 0.35, 0.1, 0, 0, 0, 0};
  CHECK(compat_residual(gen, p) < 1e-10);
  CHECK(compat_residual_perturbed(gen, p, 0, 0, 0, 0.1) >= 0.01);

  Expr flat = parse_expr("y1^2 + y2^2 + y3^2 + y4^2", ch);
  DMetric dmf = dmetric_from_finsler(flat, ch);
  CHECK(compat_residual(dmf, {0, 0, 0, 0, 1, 1, 1, 1}) == 0.0);
}

TEST_CASE("compat residual for polynomial Finsler metrics") {
  Chart ch = Chart::tangent_bundle8();
  Expr F2 = parse_expr(
      "(1 + 0.2*x1^2)*y1^2 + (1 + 0.1*x2*x3)*y2^2 + y3^2 + y4^2 + 0.05*(y1^2*y2^2)/(y1^2 + y2^2 + y3^2 + y4^2)",
      ch);
  DMetric dm = dmetric_from_finsler(F2, ch);
  std::mt19937 rng(53);
  for (int it = 0; it < 5; ++it) CHECK(compat_residual(dm, random_pt(rng)) < 1e-8);
}

TEST_CASE("Einstein d-tensor plus distortion matches the coordinate route (quadratic F)") {
  Chart ch = Chart::tangent_bundle8();
  std::vector<Expr> base_g(16, Expr::constant(0.0));
  base_g[0] = parse_expr("1 + 0.3*x1^2", ch);
  base_g[5] = parse_expr("1 + 0.1*x2^2", ch);
  base_g[10] = parse_expr("1 + 0.2*x1*x2", ch);
  base_g[15] = Expr::constant(1.0);
  DMetric dm = dmetric_from_quadratic(base_g, ch);
  auto cm = assemble_coordinate_metric(dm);
  std::mt19937 rng(59);
  for (int it = 0; it < 100; ++it) {
    auto p = random_pt(rng);
    CurvaturePack route1 = levicivita_frame_curvature(dm, p);
    CurvaturePack coord = levicivita_curvature(cm, p);
    // transform the coordinate Einstein tensor to the adapted frame
    MetricValues mv = metric_values(dm, p);
    Mat<double> A(8, 8, 0.0);
    for (int i = 0; i < 8; ++i) A(i, i) = 1.0;
    for (int a = 0; a < 4; ++a)
      for (int i = 0; i < 4; ++i) A(4 + a, i) = -mv.N(a, i);
    for (int al = 0; al < 8; ++al)
      for (int be = 0; be < 8; ++be) {
        double e = 0.0;
        for (int mu = 0; mu < 8; ++mu)
          for (int nu = 0; nu < 8; ++nu) e += A(mu, al) * A(nu, be) * coord.einstein(mu, nu);
        CHECK(std::abs(e - route1.einstein(al, be)) < 1e-5);
      }
  }
}
