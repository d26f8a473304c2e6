#include "finslerforge/dconnection.hpp"

#include <algorithm>
#include <cmath>

namespace finslerforge {

namespace {

/// Metric/N jets at a point, fiber block carrying the l*^2 factor.
struct EngineJets {
  int nb = 0, nf = 0;
  std::vector<int> coords;  // local -> chart coordinate
  std::vector<int> vars;    // sorted engaged coordinates
  std::vector<Jet> G;       // n x n block-diagonal metric jets
  std::vector<Jet> Nj;      // nf x nb
  JetSpacePtr sp;

  int n() const { return nb + nf; }
  const Jet& g(int a, int b) const { return G[a * n() + b]; }
  const Jet& nj(int a, int i) const { return Nj[a * nb + i]; }
};

EngineJets fetch_jets(const DMetric& dm, const std::vector<double>& pt, int order) {
  EngineJets ej;
  ej.nb = dm.nb();
  ej.nf = dm.nf();
  ej.coords = dm.engaged_coords();
  ej.vars = ej.coords;
  std::sort(ej.vars.begin(), ej.vars.end());
  ej.sp = JetSpace::get(ej.vars, order);
  const int n = ej.n();
  const double l2 = dm.lstar * dm.lstar;
  ej.G.assign(n * n, Jet::constant(ej.sp, 0.0));
  for (int i = 0; i < ej.nb; ++i)
    for (int j = 0; j < ej.nb; ++j) ej.G[i * n + j] = dm.gf(i, j).jet(pt, ej.vars, order);
  for (int a = 0; a < ej.nf; ++a)
    for (int b = 0; b < ej.nf; ++b)
      ej.G[(ej.nb + a) * n + ej.nb + b] = dm.hf(a, b).jet(pt, ej.vars, order) * l2;
  ej.Nj.reserve(ej.nf * ej.nb);
  for (int a = 0; a < ej.nf; ++a)
    for (int i = 0; i < ej.nb; ++i) ej.Nj.push_back(dm.Nf(a, i).jet(pt, ej.vars, order));
  return ej;
}

/// Adapted-frame derivative e_dir of a jet (order drops by one).
Jet e_deriv(const EngineJets& ej, const Jet& f, int dir) {
  Jet out = f.d(ej.coords[dir]);
  if (dir < ej.nb) {
    for (int a = 0; a < ej.nf; ++a) {
      Jet na = ej.nj(a, dir).truncate(out.space()->order());
      out -= na * f.d(ej.coords[ej.nb + a]);
    }
  }
  return out;
}

/// Canonical d-connection as jets of order (metric order - 1), full n^3.
ConnectionJets canonical_jets(const DMetric&, const EngineJets& ej) {
  const int nb = ej.nb, nf = ej.nf, n = ej.n();
  const int m = ej.sp->order() - 1;
  auto msp = JetSpace::get(ej.vars, m);
  Jet zero = Jet::constant(msp, 0.0);

  // adapted first derivatives of the metric blocks and of N
  std::vector<Jet> eg(n * n * n, zero), eN(nf * nb * n, zero);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      bool base_block = a < nb && b < nb;
      bool fiber_block = a >= nb && b >= nb;
      if (!base_block && !fiber_block) continue;
      for (int d = 0; d < n; ++d) eg[(a * n + b) * n + d] = e_deriv(ej, ej.g(a, b), d);
    }
  for (int a = 0; a < nf; ++a)
    for (int i = 0; i < nb; ++i)
      for (int d = 0; d < n; ++d) eN[(a * nb + i) * n + d] = e_deriv(ej, ej.nj(a, i), d);
  auto EG = [&](int a, int b, int d) -> const Jet& { return eg[(a * n + b) * n + d]; };
  auto EN = [&](int a, int i, int d) -> const Jet& { return eN[(a * nb + i) * n + d]; };

  Mat<Jet> gT(nb, nb, zero), hT(nf, nf, zero);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) gT(i, j) = ej.g(i, j).truncate(m);
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b) hT(a, b) = ej.g(nb + a, nb + b).truncate(m);
  Mat<Jet> ginv = mat_inverse(gT);
  Mat<Jet> hinv = mat_inverse(hT);

  ConnectionJets cj;
  cj.nb = nb;
  cj.nf = nf;
  cj.coords = ej.coords;
  cj.Gamma.assign(n * n * n, zero);
  cj.Nj = ej.Nj;

  // L^i_jk
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      for (int k = 0; k < nb; ++k) {
        Jet s = zero;
        for (int r = 0; r < nb; ++r)
          s += ginv(i, r) * (EG(j, r, k) + EG(k, r, j) - EG(j, k, r));
        cj.gamma(i, j, k) = s * 0.5;
      }
  // L^a_bk = e_b N^a_k + 1/2 h^{ac}(e_k h_bc - h_dc e_b N^d_k - h_db e_c N^d_k)
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b)
      for (int k = 0; k < nb; ++k) {
        Jet s = EN(a, k, nb + b);
        for (int c = 0; c < nf; ++c) {
          Jet inner = EG(nb + b, nb + c, k);
          for (int d = 0; d < nf; ++d) {
            inner -= hT(d, c) * EN(d, k, nb + b);
            inner -= hT(d, b) * EN(d, k, nb + c);
          }
          s += hinv(a, c) * inner * 0.5;
        }
        cj.gamma(nb + a, nb + b, k) = s;
      }
  // C^i_jc
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      for (int c = 0; c < nf; ++c) {
        Jet s = zero;
        for (int k = 0; k < nb; ++k) s += ginv(i, k) * EG(j, k, nb + c);
        cj.gamma(i, j, nb + c) = s * 0.5;
      }
  // C^a_bc
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b)
      for (int c = 0; c < nf; ++c) {
        Jet s = zero;
        for (int d = 0; d < nf; ++d)
          s += hinv(a, d) *
               (EG(nb + b, nb + d, nb + c) + EG(nb + c, nb + d, nb + b) - EG(nb + b, nb + c, nb + d));
        cj.gamma(nb + a, nb + b, nb + c) = s * 0.5;
      }
  return cj;
}

/// Anholonomy coefficient jets W^gamma_{alpha beta}, full n^3.
std::vector<Jet> anholonomy_jets(const EngineJets& ej, int order) {
  const int nb = ej.nb, nf = ej.nf, n = ej.n();
  auto msp = JetSpace::get(ej.vars, order);
  Jet zero = Jet::constant(msp, 0.0);
  std::vector<Jet> W(n * n * n, zero);
  auto at = [&](int u, int al, int be) -> Jet& { return W[(u * n + al) * n + be]; };
  for (int a = 0; a < nf; ++a)
    for (int i = 0; i < nb; ++i)
      for (int b = 0; b < nf; ++b) {
        Jet w = ej.nj(a, i).d(ej.coords[nb + b]).truncate(order);
        at(nb + a, i, nb + b) = w;
        at(nb + a, nb + b, i) = -w;
      }
  for (int a = 0; a < nf; ++a)
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j) {
        Jet om = e_deriv(ej, ej.nj(a, i), j) - e_deriv(ej, ej.nj(a, j), i);
        at(nb + a, i, j) = om.truncate(order);
      }
  return W;
}

/// Curvature of a frame connection given as jets (order >= 1):
/// R^al_{be ga de} = e_de G^al_{be ga} - e_ga G^al_{be de}
///                 + G^mu_{be ga} G^al_{mu de} - G^mu_{be de} G^al_{mu ga}
///                 + G^al_{be mu} W^mu_{ga de}
CurvaturePack curvature_kernel(const EngineJets& ej, const ConnectionJets& cj,
                               const std::vector<Jet>& Wj, const DMetric& dm,
                               const std::vector<double>& pt) {
  const int nb = ej.nb, nf = ej.nf, n = ej.n();
  CurvaturePack cp;
  cp.n = n;
  cp.nb = nb;
  cp.nf = nf;
  cp.R.assign(static_cast<size_t>(n) * n * n * n, 0.0);
  auto Wv = [&](int u, int a, int b) { return Wj[(u * n + a) * n + b].value(); };
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be)
      for (int ga = 0; ga < n; ++ga)
        for (int de = 0; de < n; ++de) {
          double r = e_deriv(ej, cj.gamma(al, be, ga), de).value() -
                     e_deriv(ej, cj.gamma(al, be, de), ga).value();
          for (int mu = 0; mu < n; ++mu) {
            r += cj.gamma(mu, be, ga).value() * cj.gamma(al, mu, de).value();
            r -= cj.gamma(mu, be, de).value() * cj.gamma(al, mu, ga).value();
            r += cj.gamma(al, be, mu).value() * Wv(mu, ga, de);
          }
          cp.R[((al * n + be) * n + ga) * n + de] = r;
        }

  // Full trace R_{alpha beta} = R^mu_{alpha beta mu}; the mixed-block
  // curvature of a d-connection vanishes, so this reduces to the block
  // contractions R_ij = R^k_ijk, R_ia = -R^k_ika, R_ai = R^b_aib, R_ab =
  // R^c_abc, and it remains the correct Ricci for a distorted connection.
  cp.ricci = Mat<double>(n, n);
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be) {
      double s = 0.0;
      for (int mu = 0; mu < n; ++mu) s += cp.r(mu, al, be, mu);
      cp.ricci(al, be) = s;
    }

  MetricValues mv = metric_values(dm, pt);
  Mat<double> ginv = mat_inverse(mv.g), hinv = mat_inverse(mv.h);
  cp.hscalar = 0.0;
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) cp.hscalar += ginv(i, j) * cp.ricci(i, j);
  cp.vscalar = 0.0;
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b) cp.vscalar += hinv(a, b) * cp.ricci(nb + a, nb + b);
  cp.scalar = cp.hscalar + cp.vscalar;

  cp.einstein = Mat<double>(n, n);
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be) {
      double gab = 0.0;
      if (al < nb && be < nb) gab = mv.g(al, be);
      if (al >= nb && be >= nb) gab = mv.h(al - nb, be - nb);
      cp.einstein(al, be) = cp.ricci(al, be) - 0.5 * gab * cp.scalar;
    }
  return cp;
}

/// Distortion jets per the corrected closed forms (Koszul-derived):
///   Z^a_jk = -1/2 h^{ab} e_b g_jk - 1/2 Om^a_jk
///   Z^i_bk = 1/2 Om^d_{lk} h_db g^{li} + C^i_kb
///   Z^i_kb = 1/2 Om^d_{lk} h_db g^{li}
///   Z^a_jb = L^a_bj - d_b N^a_j
///   Z^i_ab = 1/2 g^{li} [T^c_{la} h_cb + T^c_{lb} h_ca],  T^c_{la} = d_a N^c_l - L^c_{al}
/// remaining blocks vanish.
std::vector<Jet> distortion_jets(const EngineJets& ej, const ConnectionJets& cj) {
  const int nb = ej.nb, nf = ej.nf, n = ej.n();
  const int m = ej.sp->order() - 1;
  auto msp = JetSpace::get(ej.vars, m);
  Jet zero = Jet::constant(msp, 0.0);
  std::vector<Jet> Z(n * n * n, zero);
  auto at = [&](int u, int o, int d) -> Jet& { return Z[(u * n + o) * n + d]; };

  Mat<Jet> gT(nb, nb, zero), hT(nf, nf, zero);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) gT(i, j) = ej.g(i, j).truncate(m);
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b) hT(a, b) = ej.g(nb + a, nb + b).truncate(m);
  Mat<Jet> ginv = mat_inverse(gT), hinv = mat_inverse(hT);

  std::vector<Jet> Om(nf * nb * nb, zero), dN(nf * nb * nf, zero);
  for (int a = 0; a < nf; ++a)
    for (int i = 0; i < nb; ++i) {
      for (int j = 0; j < nb; ++j)
        Om[(a * nb + i) * nb + j] =
            (e_deriv(ej, ej.nj(a, i), j) - e_deriv(ej, ej.nj(a, j), i)).truncate(m);
      for (int b = 0; b < nf; ++b)
        dN[(a * nb + i) * nf + b] = ej.nj(a, i).d(ej.coords[nb + b]).truncate(m);
    }
  auto OM = [&](int a, int i, int j) -> const Jet& { return Om[(a * nb + i) * nb + j]; };
  auto DN = [&](int a, int i, int b) -> const Jet& { return dN[(a * nb + i) * nf + b]; };

  // Z^a_{jk}
  for (int a = 0; a < nf; ++a)
    for (int j = 0; j < nb; ++j)
      for (int k = 0; k < nb; ++k) {
        Jet s = OM(a, j, k) * (-0.5);
        for (int b = 0; b < nf; ++b)
          s -= hinv(a, b) * e_deriv(ej, ej.g(j, k), nb + b).truncate(m) * 0.5;
        at(nb + a, j, k) = s;
      }
  // Z^i_{bk} and Z^i_{kb}
  for (int i = 0; i < nb; ++i)
    for (int b = 0; b < nf; ++b)
      for (int k = 0; k < nb; ++k) {
        Jet om = zero;
        for (int d = 0; d < nf; ++d)
          for (int l = 0; l < nb; ++l) om += OM(d, l, k) * hT(d, b) * ginv(l, i) * 0.5;
        at(i, nb + b, k) = om + cj.gamma(i, k, nb + b);
        at(i, k, nb + b) = om;
      }
  // Z^a_{jb}
  for (int a = 0; a < nf; ++a)
    for (int j = 0; j < nb; ++j)
      for (int b = 0; b < nf; ++b)
        at(nb + a, j, nb + b) = cj.gamma(nb + a, nb + b, j) - DN(a, j, b);
  // Z^i_{ab}
  for (int i = 0; i < nb; ++i)
    for (int a = 0; a < nf; ++a)
      for (int b = 0; b < nf; ++b) {
        Jet s = zero;
        for (int l = 0; l < nb; ++l) {
          Jet inner = zero;
          for (int c = 0; c < nf; ++c) {
            Jet Tcla = DN(c, l, a) - cj.gamma(nb + c, nb + a, l);
            Jet Tclb = DN(c, l, b) - cj.gamma(nb + c, nb + b, l);
            inner += Tcla * hT(c, b) + Tclb * hT(c, a);
          }
          s += ginv(l, i) * inner * 0.5;
        }
        at(i, nb + a, nb + b) = s;
      }
  return Z;
}

}  // namespace

DConnection canonical_dconnection(const DMetric& dm, const std::vector<double>& point) {
  EngineJets ej = fetch_jets(dm, point, 1);
  ConnectionJets cj = canonical_jets(dm, ej);
  const int nb = ej.nb, nf = ej.nf;
  DConnection dc;
  dc.nb = nb;
  dc.nf = nf;
  dc.L_h.resize(nb * nb * nb);
  dc.L_v.resize(nf * nf * nb);
  dc.C_h.resize(nb * nb * nf);
  dc.C_v.resize(nf * nf * nf);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      for (int k = 0; k < nb; ++k) dc.L_h[(i * nb + j) * nb + k] = cj.gamma(i, j, k).value();
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b)
      for (int k = 0; k < nb; ++k)
        dc.L_v[(a * nf + b) * nb + k] = cj.gamma(nb + a, nb + b, k).value();
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      for (int c = 0; c < nf; ++c) dc.C_h[(i * nb + j) * nf + c] = cj.gamma(i, j, nb + c).value();
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b)
      for (int c = 0; c < nf; ++c)
        dc.C_v[(a * nf + b) * nf + c] = cj.gamma(nb + a, nb + b, nb + c).value();
  return dc;
}

FrameData nonholonomic_frames(const DMetric& dm, const std::vector<double>& point) {
  EngineJets ej = fetch_jets(dm, point, 1);
  const int nb = ej.nb, nf = ej.nf;
  FrameData fd;
  fd.nb = nb;
  fd.nf = nf;
  fd.W.assign(nf * nb * nf, 0.0);
  fd.Omega.assign(nf * nb * nb, 0.0);
  for (int b = 0; b < nf; ++b)
    for (int i = 0; i < nb; ++i)
      for (int a = 0; a < nf; ++a)
        fd.W[(b * nb + i) * nf + a] = ej.nj(b, i).d(ej.coords[nb + a]).value();
  for (int a = 0; a < nf; ++a)
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j)
        fd.Omega[(a * nb + i) * nb + j] =
            (e_deriv(ej, ej.nj(a, i), j) - e_deriv(ej, ej.nj(a, j), i)).value();
  return fd;
}

TorsionDistortion torsion_and_distortion(const DMetric& dm, const std::vector<double>& point) {
  EngineJets ej = fetch_jets(dm, point, 1);
  ConnectionJets cj = canonical_jets(dm, ej);
  const int nb = ej.nb, nf = ej.nf, n = ej.n();

  TorsionDistortion td;
  TorsionPack& tp = td.torsion;
  tp.nb = nb;
  tp.nf = nf;
  tp.T_hhh.assign(nb * nb * nb, 0.0);
  tp.T_hhv.assign(nb * nb * nf, 0.0);
  tp.T_vhh.assign(nf * nb * nb, 0.0);
  tp.T_vvh.assign(nf * nf * nb, 0.0);
  tp.T_vvv.assign(nf * nf * nf, 0.0);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      for (int k = 0; k < nb; ++k)
        tp.T_hhh[(i * nb + j) * nb + k] =
            cj.gamma(i, j, k).value() - cj.gamma(i, k, j).value();
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      for (int a = 0; a < nf; ++a)
        tp.T_hhv[(i * nb + j) * nf + a] = cj.gamma(i, j, nb + a).value();
  for (int a = 0; a < nf; ++a)
    for (int j = 0; j < nb; ++j)
      for (int i = 0; i < nb; ++i)
        tp.T_vhh[(a * nb + j) * nb + i] =
            -(e_deriv(ej, ej.nj(a, j), i) - e_deriv(ej, ej.nj(a, i), j)).value();
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b)
      for (int i = 0; i < nb; ++i)
        tp.T_vvh[(a * nf + b) * nb + i] =
            cj.gamma(nb + a, nb + b, i).value() - ej.nj(a, i).d(ej.coords[nb + b]).value();
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b)
      for (int c = 0; c < nf; ++c)
        tp.T_vvv[(a * nf + b) * nf + c] =
            cj.gamma(nb + a, nb + b, nb + c).value() - cj.gamma(nb + a, nb + c, nb + b).value();

  std::vector<Jet> Z = distortion_jets(ej, cj);
  td.distortion.n = n;
  td.distortion.Z.resize(n * n * n);
  for (size_t i = 0; i < Z.size(); ++i) td.distortion.Z[i] = Z[i].value();
  return td;
}

std::vector<double> levicivita_oracle(const CoordMetric& cm, const std::vector<double>& point) {
  const int n = cm.n;
  std::vector<int> vars = cm.coords;
  std::sort(vars.begin(), vars.end());
  Mat<double> g(n, n);
  std::vector<Jet> gj;
  gj.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      gj.push_back(cm.at(i, j).jet(point, vars, 1));
      g(i, j) = gj.back().value();
    }
  Mat<double> ginv = mat_inverse(g);
  auto dg = [&](int i, int j, int mu) { return gj[i * n + j].d(cm.coords[mu]).value(); };
  std::vector<double> ch(n * n * n, 0.0);
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be)
      for (int ga = 0; ga < n; ++ga) {
        double s = 0.0;
        for (int mu = 0; mu < n; ++mu)
          s += ginv(al, mu) * (dg(mu, be, ga) + dg(mu, ga, be) - dg(be, ga, mu));
        ch[(al * n + be) * n + ga] = 0.5 * s;
      }
  return ch;
}

CurvaturePack levicivita_curvature(const CoordMetric& cm, const std::vector<double>& point) {
  const int n = cm.n;
  std::vector<int> vars = cm.coords;
  std::sort(vars.begin(), vars.end());
  auto sp2 = JetSpace::get(vars, 2);
  Jet zero1 = Jet::constant(JetSpace::get(vars, 1), 0.0);

  Mat<Jet> g(n, n, zero1);
  std::vector<Jet> gj2;
  gj2.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      gj2.push_back(cm.at(i, j).jet(point, vars, 2));
      g(i, j) = gj2.back().truncate(1);
    }
  Mat<Jet> ginv = mat_inverse(g);
  std::vector<Jet> ch(n * n * n, zero1);
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be)
      for (int ga = 0; ga < n; ++ga) {
        Jet s = zero1;
        for (int mu = 0; mu < n; ++mu)
          s += ginv(al, mu) * (gj2[mu * n + be].d(cm.coords[ga]) + gj2[mu * n + ga].d(cm.coords[be]) -
                               gj2[be * n + ga].d(cm.coords[mu]));
        ch[(al * n + be) * n + ga] = s * 0.5;
      }
  auto CH = [&](int u, int o, int d) -> const Jet& { return ch[(u * n + o) * n + d]; };

  CurvaturePack cp;
  cp.n = n;
  cp.nb = n;
  cp.nf = 0;
  cp.R.assign(static_cast<size_t>(n) * n * n * n, 0.0);
  // same sign convention as the d-connection kernel, W = 0, e = coordinate d
  for (int al = 0; al < n; ++al)
    for (int be = 0; be < n; ++be)
      for (int ga = 0; ga < n; ++ga)
        for (int de = 0; de < n; ++de) {
          double r = CH(al, be, ga).d(cm.coords[de]).value() -
                     CH(al, be, de).d(cm.coords[ga]).value();
          for (int mu = 0; mu < n; ++mu) {
            r += CH(mu, be, ga).value() * CH(al, mu, de).value();
            r -= CH(mu, be, de).value() * CH(al, mu, ga).value();
          }
          cp.R[((al * n + be) * n + ga) * n + de] = r;
        }
  cp.ricci = Mat<double>(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += cp.r(k, i, j, k);
      cp.ricci(i, j) = s;
    }
  Mat<double> gval(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gval(i, j) = gj2[i * n + j].value();
  Mat<double> gvinv = mat_inverse(gval);
  cp.scalar = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cp.scalar += gvinv(i, j) * cp.ricci(i, j);
  cp.hscalar = cp.scalar;
  cp.einstein = Mat<double>(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cp.einstein(i, j) = cp.ricci(i, j) - 0.5 * gval(i, j) * cp.scalar;
  return cp;
}

std::vector<double> frame_transform_connection(const DMetric& dm,
                                               const std::vector<double>& coord_conn,
                                               const std::vector<double>& point) {
  EngineJets ej = fetch_jets(dm, point, 1);
  const int nb = ej.nb, nf = ej.nf, n = ej.n();
  // A^mu_al: e_al = A^mu_al d_mu ; B = A^{-1}
  Mat<double> A(n, n, 0.0), B(n, n, 0.0);
  for (int i = 0; i < n; ++i) {
    A(i, i) = 1.0;
    B(i, i) = 1.0;
  }
  for (int a = 0; a < nf; ++a)
    for (int i = 0; i < nb; ++i) {
      A(nb + a, i) = -ej.nj(a, i).value();
      B(nb + a, i) = ej.nj(a, i).value();
    }
  // dA[nu][mu][al] = d_nu A^mu_al
  std::vector<double> dA(n * n * n, 0.0);
  for (int a = 0; a < nf; ++a)
    for (int i = 0; i < nb; ++i)
      for (int nu = 0; nu < n; ++nu)
        dA[(nu * n + nb + a) * n + i] = -ej.nj(a, i).d(ej.coords[nu]).value();

  std::vector<double> out(n * n * n, 0.0);
  for (int ga = 0; ga < n; ++ga)
    for (int al = 0; al < n; ++al)
      for (int be = 0; be < n; ++be) {
        double s = 0.0;
        for (int mu = 0; mu < n; ++mu) {
          double t = 0.0;
          for (int nu = 0; nu < n; ++nu) {
            t += A(nu, be) * dA[(nu * n + mu) * n + al];
            for (int si = 0; si < n; ++si)
              t += A(nu, be) * A(si, al) * coord_conn[(mu * n + si) * n + nu];
          }
          s += B(ga, mu) * t;
        }
        out[(ga * n + al) * n + be] = s;
      }
  return out;
}

CurvaturePack curvature_and_ricci(const DMetric& dm, const std::vector<double>& point) {
  EngineJets ej = fetch_jets(dm, point, 2);
  ConnectionJets cj = canonical_jets(dm, ej);
  std::vector<Jet> Wj = anholonomy_jets(ej, 1);
  return curvature_kernel(ej, cj, Wj, dm, point);
}

CurvaturePack levicivita_frame_curvature(const DMetric& dm, const std::vector<double>& point) {
  EngineJets ej = fetch_jets(dm, point, 2);
  ConnectionJets cj = canonical_jets(dm, ej);
  std::vector<Jet> Z = distortion_jets(ej, cj);
  for (size_t i = 0; i < cj.Gamma.size(); ++i) cj.Gamma[i] += Z[i];
  std::vector<Jet> Wj = anholonomy_jets(ej, 1);
  return curvature_kernel(ej, cj, Wj, dm, point);
}

double compat_residual(const DMetric& dm, const std::vector<double>& point) {
  return compat_residual_perturbed(dm, point, -1, -1, -1, 0.0);
}

double compat_residual_perturbed(const DMetric& dm, const std::vector<double>& point, int up,
                                 int obj, int dir, double delta) {
  EngineJets ej = fetch_jets(dm, point, 1);
  ConnectionJets cj = canonical_jets(dm, ej);
  const int nb = ej.nb, n = ej.n();
  std::vector<double> gamma(n * n * n);
  for (int u = 0; u < n; ++u)
    for (int o = 0; o < n; ++o)
      for (int d = 0; d < n; ++d) gamma[(u * n + o) * n + d] = cj.gamma(u, o, d).value();
  if (up >= 0) gamma[(up * n + obj) * n + dir] += delta;

  Mat<double> G(n, n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      bool bb = a < nb && b < nb, ff = a >= nb && b >= nb;
      if (bb || ff) G(a, b) = ej.g(a, b).value();
    }
  double worst = 0.0;
  for (int ga = 0; ga < n; ++ga)
    for (int al = 0; al < n; ++al)
      for (int be = 0; be < n; ++be) {
        bool bb = al < nb && be < nb, ff = al >= nb && be >= nb;
        double cov = (bb || ff) ? e_deriv(ej, ej.g(al, be), ga).value() : 0.0;
        for (int mu = 0; mu < n; ++mu) {
          cov -= gamma[(mu * n + al) * n + ga] * G(mu, be);
          cov -= gamma[(mu * n + be) * n + ga] * G(al, mu);
        }
        worst = std::max(worst, std::abs(cov));
      }
  return worst;
}

}  // namespace finslerforge
