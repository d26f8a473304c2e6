#include "finslerforge/hl.hpp"

#include <cmath>

namespace finslerforge {

namespace {

constexpr int kSpatial[3] = {1, 2, 3};  // chart indices of x2, x3, x4
const std::vector<int> kSpatialVars = {1, 2, 3};

struct SpatialGeom {
  JetSpacePtr sp1;
  Mat<double> g, ginv;
  std::vector<Jet> gj;    // metric jets, order 3
  std::vector<Jet> ch;    // Christoffels, jets order 2
  std::vector<Jet> ric;   // Ricci R_ij, jets order 1
  Jet Rsc;                // scalar curvature, jet order 1
  Mat<Jet> ginv1;         // inverse metric jets, order 1 (order-2 entries truncated)
  double sqrtg = 0.0;
};

/// Spatial Levi-Civita data at fixed t, with enough jet depth for the
/// Cotton tensor (one covariant derivative of the Ricci tensor).
SpatialGeom spatial_geometry(const HLFields& f, const std::vector<double>& point) {
  SpatialGeom s;
  const int n = 3;
  s.gj.reserve(9);
  for (int i = 0; i < 9; ++i) s.gj.push_back(eval_jet_unchecked(f.g3[i], point, 3, kSpatialVars));
  s.g = Mat<double>(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s.g(i, j) = s.gj[i * 3 + j].value();
  double det = mat_det(s.g);
  if (std::abs(det) < 1e-14) throw SingularMatrixError(det);
  s.ginv = mat_inverse(s.g);
  s.sqrtg = std::sqrt(std::abs(det));

  auto sp2 = JetSpace::get(kSpatialVars, 2);
  Jet zero2 = Jet::constant(sp2, 0.0);
  Mat<Jet> g2(3, 3, zero2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g2(i, j) = s.gj[i * 3 + j].truncate(2);
  Mat<Jet> ginv2 = mat_inverse(g2);
  s.ginv1 = Mat<Jet>(3, 3, Jet::constant(JetSpace::get(kSpatialVars, 1), 0.0));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s.ginv1(i, j) = ginv2(i, j).truncate(1);

  s.ch.assign(27, zero2);
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be)
      for (int ga = 0; ga < n; ++ga) {
        Jet t = zero2;
        for (int mu = 0; mu < n; ++mu)
          t += ginv2(al, mu) * (s.gj[mu * 3 + be].d(kSpatial[ga]) +
                                s.gj[mu * 3 + ga].d(kSpatial[be]) -
                                s.gj[be * 3 + ga].d(kSpatial[mu]));
        s.ch[(al * 3 + be) * 3 + ga] = t * 0.5;
      }
  auto CH = [&](int u, int o, int d) -> const Jet& { return s.ch[(u * 3 + o) * 3 + d]; };

  auto sp1 = JetSpace::get(kSpatialVars, 1);
  s.sp1 = sp1;
  Jet zero1 = Jet::constant(sp1, 0.0);
  s.ric.assign(9, zero1);
  // Ricci from the Riemann trace, same sign convention as the main engine
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Jet sum = zero1;
      for (int k = 0; k < n; ++k) {
        // R^k_{i j k} = d_k Gamma^k_{ij} - d_j Gamma^k_{ik} + G G - G G
        Jet r = CH(k, i, j).d(kSpatial[k]) - CH(k, i, k).d(kSpatial[j]);
        for (int mu = 0; mu < n; ++mu) {
          r += CH(mu, i, j).truncate(1) * CH(k, mu, k).truncate(1);
          r -= CH(mu, i, k).truncate(1) * CH(k, mu, j).truncate(1);
        }
        sum += r;
      }
      s.ric[i * 3 + j] = sum;
    }
  s.Rsc = zero1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s.Rsc += s.ginv1(i, j) * s.ric[i * 3 + j];
  return s;
}

/// Spatial permutation symbol.
double eps3(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0.0;
  return ((j - i) * (k - j) * (k - i)) > 0 ? 1.0 : -1.0;
}

Mat<double> extrinsic_curvature(const HLFields& f, const std::vector<double>& point,
                                const SpatialGeom& s) {
  if (f.projectable) {
    // projectable lapse: reject spatial dependence early
    for (int v : kSpatialVars)
      for (int used : f.lapse.variables())
        if (used == v)
          throw EvalError("projectable lapse must depend on t only", -1);
  }
  double N = eval(f.lapse, point);
  if (N == 0.0) throw DomainError("vanishing lapse");
  // time derivative of g_ij and spatial jets of the lowered shift
  std::vector<int> all = {0, 1, 2, 3};
  Mat<double> dtg(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      dtg(i, j) = eval_jet_unchecked(f.g3[i * 3 + j], point, 1, {0}).deriv({0});

  // N_j = g_jk N^k as spatial jets of order 1
  auto sp1 = JetSpace::get(kSpatialVars, 1);
  std::vector<Jet> Nlow(3, Jet::constant(sp1, 0.0));
  for (int j = 0; j < 3; ++j) {
    Jet acc = Jet::constant(sp1, 0.0);
    for (int k = 0; k < 3; ++k) {
      Jet shift_k = eval_jet_unchecked(f.shift[k], point, 1, kSpatialVars);
      acc += s.gj[j * 3 + k].truncate(1) * shift_k;
    }
    Nlow[j] = acc;
  }
  Mat<double> K(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double covi = Nlow[j].d(kSpatial[i]).value();
      double covj = Nlow[i].d(kSpatial[j]).value();
      for (int k = 0; k < 3; ++k) {
        covi -= s.ch[(k * 3 + i) * 3 + j].value() * Nlow[k].value();
        covj -= s.ch[(k * 3 + j) * 3 + i].value() * Nlow[k].value();
      }
      K(i, j) = (dtg(i, j) - covi - covj) / (2.0 * N);
    }
  return K;
}

}  // namespace

AdmPair adm_assemble_and_scale(const HLFields& f, const std::vector<double>& point, double l) {
  auto assemble = [&](double N, const std::array<double, 3>& Ni, const Mat<double>& g3) {
    Mat<double> M(4, 4);
    double nn = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) nn += g3(i, j) * Ni[i] * Ni[j];
    M(0, 0) = -N * N + nn;
    for (int j = 0; j < 3; ++j) {
      double lowered = 0.0;
      for (int i = 0; i < 3; ++i) lowered += g3(i, j) * Ni[i];
      M(0, j + 1) = lowered;
      M(j + 1, 0) = lowered;
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) M(i + 1, j + 1) = g3(i, j);
    return M;
  };
  double N = eval(f.lapse, point);
  std::array<double, 3> Ni;
  for (int i = 0; i < 3; ++i) Ni[i] = eval(f.shift[i], point);
  Mat<double> g3(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g3(i, j) = eval(f.g3[i * 3 + j], point);

  AdmPair out;
  out.before = assemble(N, Ni, g3);
  double s = 1.0 / (l * l);
  std::array<double, 3> Nis = {Ni[0] * s, Ni[1] * s, Ni[2] * s};
  out.after = assemble(N * s, Nis, g3);
  out.lapse_raw = N;
  out.lapse_scaled = N * s;
  out.shift_raw = Ni;
  out.shift_scaled = Nis;
  return out;
}

Invariants3 curvature_invariants_3d(const HLFields& f, const std::vector<double>& point) {
  SpatialGeom s = spatial_geometry(f, point);
  Invariants3 out;
  out.K = extrinsic_curvature(f, point, s);
  out.trK = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.trK += s.ginv(i, j) * out.K(i, j);
  out.ricci = Mat<double>(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.ricci(i, j) = s.ric[i * 3 + j].value();
  out.R = s.Rsc.value();

  // mixed Ricci minus quarter-scalar, as order-1 jets
  Jet zero1 = Jet::constant(s.sp1, 0.0);
  std::vector<Jet> M(9, zero1);
  for (int j = 0; j < 3; ++j)
    for (int l = 0; l < 3; ++l) {
      Jet t = zero1;
      for (int m = 0; m < 3; ++m) t += s.ginv1(j, m) * s.ric[m * 3 + l];
      if (j == l) t -= s.Rsc * 0.25;
      M[j * 3 + l] = t;
    }
  // nabla_k M^j_l values
  auto covd = [&](int k, int j, int l) {
    double v = M[j * 3 + l].d(kSpatial[k]).value();
    for (int m = 0; m < 3; ++m) {
      v += s.ch[(j * 3 + k) * 3 + m].value() * M[m * 3 + l].value();
      v -= s.ch[(m * 3 + k) * 3 + l].value() * M[j * 3 + m].value();
    }
    return v;
  };
  Mat<double> C(3, 3, 0.0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double sum = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) sum += eps3(i, k, l) * covd(k, j, l);
      C(i, j) = sum / s.sqrtg;
    }
  out.cotton = Mat<double>(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.cotton(i, j) = 0.5 * (C(i, j) + C(j, i));
  return out;
}

ActionDensity hl_action_density(const HLFields& f, const std::vector<double>& point) {
  const HLConstants& k = f.k;
  if (std::abs(1.0 - 3.0 * k.lambda) < 1e-14)
    throw DomainError("potential has a pole at lambda = 1/3");
  SpatialGeom s = spatial_geometry(f, point);
  Invariants3 inv = curvature_invariants_3d(f, point);
  double N = eval(f.lapse, point);

  double KK = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          KK += inv.K(i, j) * s.ginv(i, a) * s.ginv(j, b) * inv.K(a, b);
  ActionDensity out;
  out.kinetic = 2.0 / (k.kappa * k.kappa) * s.sqrtg * N * (KK - k.lambda * inv.trK * inv.trK);

  // epsilon^ijk R_il nabla_j R^l_k with tensor epsilon = symbol / sqrt(g)
  Jet zero1 = Jet::constant(s.sp1, 0.0);
  std::vector<Jet> Rmix(9, zero1);
  for (int l = 0; l < 3; ++l)
    for (int kk2 = 0; kk2 < 3; ++kk2) {
      Jet t = zero1;
      for (int m = 0; m < 3; ++m) t += s.ginv1(l, m) * s.ric[m * 3 + kk2];
      Rmix[l * 3 + kk2] = t;
    }
  auto covd = [&](int j, int l, int kk2) {
    double v = Rmix[l * 3 + kk2].d(kSpatial[j]).value();
    for (int m = 0; m < 3; ++m) {
      v += s.ch[(l * 3 + j) * 3 + m].value() * Rmix[m * 3 + kk2].value();
      v -= s.ch[(m * 3 + j) * 3 + kk2].value() * Rmix[l * 3 + m].value();
    }
    return v;
  };
  double epsterm = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int kk2 = 0; kk2 < 3; ++kk2) {
        if (eps3(i, j, kk2) == 0.0) continue;
        for (int l = 0; l < 3; ++l)
          epsterm += eps3(i, j, kk2) / s.sqrtg * inv.ricci(i, l) * covd(j, l, kk2);
      }

  double RR = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          RR += inv.ricci(i, j) * s.ginv(i, a) * s.ginv(j, b) * inv.ricci(a, b);
  double CC = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          CC += inv.cotton(i, j) * s.g(i, a) * s.g(j, b) * inv.cotton(a, b);

  double k2 = k.kappa * k.kappa;
  double R = inv.R;
  double pot = k2 * k.mu / (2.0 * k.varpi * k.varpi) * epsterm - k2 * k.mu / 8.0 * RR +
               k2 * k.mu / (8.0 * (1.0 - 3.0 * k.lambda)) *
                   ((1.0 - 4.0 * k.lambda) / 4.0 * R * R + k.Lambda * R -
                    3.0 * k.Lambda * k.Lambda) -
               k2 / (2.0 * k.varpi * k.varpi) * CC;
  out.potential = s.sqrtg * N * pot;
  return out;
}

GrLimit gr_limit_constants(double kappa, double mu, double Lambda, double lambda) {
  double denom = 1.0 - 3.0 * lambda;
  if (std::abs(denom) < 1e-14) throw DomainError("pole at lambda = 1/3");
  double ratio = Lambda / denom;
  if (ratio < 0.0) throw DomainError("imaginary emergent speed of light: Lambda/(1-3 lambda) < 0");
  double root = std::sqrt(ratio);
  GrLimit out;
  out.c = kappa * kappa * mu / 4.0 * root;
  out.G = kappa * kappa * kappa * kappa * mu / 8.0 * root / (16.0 * M_PI);
  out.Lambda_gr = 3.0 * std::pow(kappa, 4) * mu * mu * Lambda * Lambda / (32.0 * denom);
  return out;
}

const char* mdr_branch_name(MdrBranch b) {
  switch (b) {
    case MdrBranch::ScalarLowP: return "scalar-low-p";
    case MdrBranch::ScalarHighP: return "scalar-high-p";
    case MdrBranch::TensorDetailedBalance: return "tensor-db";
    case MdrBranch::ScalarUvBeyond: return "scalar-uv-beyond";
    case MdrBranch::TensorBeyond: return "tensor-beyond";
  }
  return "?";
}

std::optional<MdrBranch> mdr_branch_from_name(const std::string& name) {
  for (MdrBranch b : {MdrBranch::ScalarLowP, MdrBranch::ScalarHighP,
                      MdrBranch::TensorDetailedBalance, MdrBranch::ScalarUvBeyond,
                      MdrBranch::TensorBeyond})
    if (name == mdr_branch_name(b)) return b;
  return std::nullopt;
}

double mdr_omega2(MdrBranch branch, const HLConstants& k, double p, int sign) {
  double k2 = k.kappa * k.kappa, k4 = k2 * k2;
  double denom = 1.0 - 3.0 * k.lambda;
  switch (branch) {
    case MdrBranch::ScalarLowP:
      if (std::abs(denom) < 1e-14) throw DomainError("pole at lambda = 1/3");
      return -9.0 * k4 * k.mu * k.mu * k.Lambda * k.Lambda / (32.0 * denom * denom);
    case MdrBranch::ScalarHighP: {
      if (std::abs(denom) < 1e-14) throw DomainError("pole at lambda = 1/3");
      double f = (1.0 - k.lambda) / denom;
      return k4 * k.mu * k.mu / 16.0 * f * f * std::pow(p, 4);
    }
    case MdrBranch::TensorDetailedBalance: {
      if (sign != 1 && sign != -1)
        throw std::invalid_argument("tensor branch requires an explicit +-1 sign");
      double w2 = k.c * k.c * p * p + k4 * k.mu * k.mu / 16.0 * std::pow(p, 4);
      w2 += sign * k4 * k.mu / (4.0 * k.varpi * k.varpi) * std::pow(p, 5);
      w2 += k4 / (4.0 * std::pow(k.varpi, 4)) * std::pow(p, 6);
      return w2;
    }
    case MdrBranch::ScalarUvBeyond: {
      if (std::abs(denom) < 1e-14) throw DomainError("pole at lambda = 1/3");
      double a = k2 * (1.0 - k.lambda) * (1.0 - k.lambda) / (16.0 * denom * denom);
      double b = 3.0 * k2 * (1.0 - k.lambda) / (2.0 * denom);
      return a * std::pow(p, 4) - b * k.eta * std::pow(p, 6);
    }
    case MdrBranch::TensorBeyond: {
      if (sign != 1 && sign != -1)
        throw std::invalid_argument("tensor branch requires an explicit +-1 sign");
      double w2 = k.c * k.c * p * p + k4 * k.mu * k.mu / 16.0 * std::pow(p, 4);
      w2 += sign * k4 * k.mu / (4.0 * k.varpi * k.varpi) * std::pow(p, 5);
      w2 += (k4 / (4.0 * std::pow(k.varpi, 4)) - k2 * k.eta / 2.0) * std::pow(p, 6);
      return w2;
    }
  }
  throw std::logic_error("unknown branch");
}

}  // namespace finslerforge
