#include "finslerforge/brane.hpp"

#include <cmath>

namespace finslerforge {

namespace {

/// 1-d jets in a scratch variable for AD of the closed profile forms.
Jet svar(double s, int order) { return Jet::variable(JetSpace::get({0}, order), 0, s); }

Jet phi2_jet(const BraneProfile& p, const Jet& s) {
  double e2 = p.eps * p.eps;
  return (3.0 * e2 + p.a * s * s) / (3.0 * e2 + s * s);
}

Jet lhbar_jet(const BraneProfile& p, const Jet& s) {
  double e2 = p.eps * p.eps;
  Jet den = 3.0 * e2 + s * s;
  return 9.0 * e2 * e2 / (den * den);
}

Jet K1M_jet(const BraneProfile& p, const Jet& s) {
  double e2 = p.eps * p.eps, f = p.phi0, m = p.m;
  Jet D = 3.0 * e2 + s * s;
  Jet s2 = s * s;
  Jet poly = 2.0 * f * m * (f * (m + 2.0) - 3.0) / (3.0 * e2) * s2 * s2 +
             2.0 * (-2.0 * f * (m * m + 2.0 * m + 6.0) + 3.0 * (m + 3.0) * (1.0 + f * f)) * s2 -
             6.0 * e2 * m * (m - 3.0 * f + 2.0);
  return p.Lambda + poly / (D * D);
}

Jet K2M_jet(const BraneProfile& p, const Jet& s) {
  double e2 = p.eps * p.eps, f = p.phi0, m = p.m;
  Jet D = 3.0 * e2 + s * s;
  Jet s2 = s * s;
  Jet poly = 2.0 * f * (m - 1.0) * (f * (m + 2.0) - 4.0) / (3.0 * e2) * s2 * s2 +
             4.0 * (-f * (m * m + m + 10.0) + 2.0 * (m + 2.0) * (1.0 + f * f)) * s2 -
             6.0 * e2 * (m - 1.0) * (m - 4.0 * f + 2.0);
  return p.Lambda + poly / (D * D);
}

}  // namespace

double BraneProfile::phi2(double s) const { return phi2_jet(*this, svar(s, 0)).value(); }
double BraneProfile::lhbar(double s) const { return lhbar_jet(*this, svar(s, 0)).value(); }
double BraneProfile::K1M(double s) const { return K1M_jet(*this, svar(s, 0)).value(); }
double BraneProfile::K2M(double s) const { return K2M_jet(*this, svar(s, 0)).value(); }

double BraneProfile::conservation_residual(double s) const {
  Jet sj = svar(s, 1);
  Jet k1 = K1M_jet(*this, sj), k2 = K2M_jet(*this, sj);
  Jet lnphi = log(phi2_jet(*this, sj)) * 0.5;
  double lhs = k1.deriv({0});
  double rhs = 4.0 * (k2.value() - k1.value()) * lnphi.deriv({0});
  return std::abs(lhs - rhs);
}

BraneProfile brane_profile(double M, double Lambda, int m, double phi0, bool solve_a,
                           double a_input) {
  if (M <= 0.0 || Lambda <= 0.0) throw DomainError("brane profile needs M > 0 and Lambda > 0");
  if (m < 2) throw std::invalid_argument("extra-dimension count m must be >= 2");
  BraneProfile p;
  p.M = M;
  p.Lambda = Lambda;
  p.m = m;
  p.phi0 = phi0;
  p.eps = std::sqrt(40.0 * std::pow(M, 4) / (3.0 * Lambda));
  p.a = a_input;
  if (solve_a) {
    // d^2 phi/ds^2 at s = eps as a function of a
    auto f = [&](double a) {
      BraneProfile q = p;
      q.a = a;
      Jet sj = svar(q.eps, 2);
      Jet phi = sqrt(phi2_jet(q, sj));
      return phi.deriv({0, 0});
    };
    const double lo0 = 1e-6, hi0 = 100.0, tol = 1e-12;
    double prev_a = lo0, prev_f = f(lo0);
    double root = std::numeric_limits<double>::quiet_NaN();
    for (int i = 1; i <= 200; ++i) {
      double x = lo0 + (hi0 - lo0) * i / 200.0;
      double fx = f(x);
      if (std::abs(fx) <= tol) {
        root = x;
        break;
      }
      if (prev_f * fx < 0.0) {
        double lo = prev_a, hi = x, flo = prev_f;
        while (hi - lo > tol) {
          double mid = 0.5 * (lo + hi);
          double fm = f(mid);
          if (std::abs(fm) <= tol) {
            lo = hi = mid;
            break;
          }
          if (flo * fm < 0.0)
            hi = mid;
          else {
            lo = mid;
            flo = fm;
          }
        }
        root = 0.5 * (lo + hi);
        break;
      }
      prev_a = x;
      prev_f = fx;
    }
    if (!std::isfinite(root))
      throw DomainError("profile root-finder found no sign change of d2 phi/ds2 on a in (" +
                        std::to_string(lo0) + ", " + std::to_string(hi0) + "]");
    p.a = root;
  }
  return p;
}

BraneReport brane_sources_and_conservation(const BraneProfile& p, double lo, double hi,
                                           int count) {
  BraneReport rep;
  for (int i = 0; i < count; ++i) {
    double s = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    BraneSample smp;
    smp.y5 = s;
    smp.phi2 = p.phi2(s);
    smp.lhbar = p.lhbar(s);
    smp.K1M = p.K1M(s);
    smp.K2M = p.K2M(s);
    smp.cons_residual = p.conservation_residual(s);
    rep.max_cons_residual = std::max(rep.max_cons_residual, smp.cons_residual);
    rep.samples.push_back(smp);
  }
  return rep;
}

Mat<double> assemble_brane_metric(const ShellAnsatz& a, const BraneProfile& p,
                                  const std::array<ScalarField, 4>& qh,
                                  const std::vector<double>& point) {
  double s = point[4];  // y5
  double warp = p.hbar_l2(s) / p.phi2(s);
  double g1 = a.g1.value(point), g2 = a.g2.value(point);
  double h3 = a.h3.value(point), h4 = a.h4.value(point);
  double hh[4];
  for (int i = 0; i < 4; ++i) hh[i] = warp * qh[i].value(point);
  double w_[2] = {a.w[0].value(point), a.w[1].value(point)};
  double n_[2] = {a.n[0].value(point), a.n[1].value(point)};
  double w1_[2] = {a.w1[0].value(point), a.w1[1].value(point)};
  double n1_[2] = {a.n1[0].value(point), a.n1[1].value(point)};
  double w2_[2] = {a.w2[0].value(point), a.w2[1].value(point)};
  double n2_[2] = {a.n2[0].value(point), a.n2[1].value(point)};

  Mat<double> M(8, 8, 0.0);
  auto B = [&](int i, int j) {
    double v = w_[i] * w_[j] * h3 + n_[i] * n_[j] * h4 + w1_[i] * w1_[j] * hh[0] +
               n1_[i] * n1_[j] * hh[1] + w2_[i] * w2_[j] * hh[2] + n2_[i] * n2_[j] * hh[3];
    return v;
  };
  M(0, 0) = g1 + B(0, 0);
  M(1, 1) = g2 + B(1, 1);
  M(0, 1) = M(1, 0) = B(0, 1);
  const double diag[6] = {h3, h4, hh[0], hh[1], hh[2], hh[3]};
  const double* forms[6] = {w_, n_, w1_, n1_, w2_, n2_};
  for (int blk = 0; blk < 6; ++blk) {
    int col = 2 + blk;
    M(col, col) = diag[blk];
    for (int i = 0; i < 2; ++i) {
      M(i, col) = forms[blk][i] * diag[blk];
      M(col, i) = M(i, col);
    }
  }
  return M;
}

Mat<double> diagonal_profile_metric(const BraneProfile& p, int sign7, int sign8, double y5) {
  Mat<double> M(8, 8, 0.0);
  double f2 = p.phi2(y5);
  double hb = p.hbar_l2(y5);
  const double eta[4] = {1.0, -1.0, -1.0, -1.0};
  for (int i = 0; i < 4; ++i) M(i, i) = f2 * eta[i];
  M(4, 4) = -hb;
  M(5, 5) = -hb;
  M(6, 6) = -static_cast<double>(sign7) * hb;
  M(7, 7) = -static_cast<double>(sign8) * hb;
  return M;
}

}  // namespace finslerforge
