#include "finslerforge/solver.hpp"

#include <cmath>
#include <thread>

namespace finslerforge {

namespace {

// chart coordinate indices on tangent_bundle8
constexpr int X1 = 0, X2 = 1, V = 2, X4 = 3, Y5 = 4, Y6 = 5, Y7 = 6, Y8 = 7;

struct ShellDesc {
  const ScalarField* ha;
  const ScalarField* hb;
  int vcoord;
  std::vector<int> base;  // coordinates carrying the w/n one-form slots
  const ScalarField* w;
  const ScalarField* n;
  const ScalarField* source;  // the Lambda this shell's v-equation balances
  std::string tag;
};

std::vector<ShellDesc> shells(const ShellAnsatz& a, const SourceSpec& s) {
  return {
      {&a.h3, &a.h4, V, {X1, X2}, a.w.data(), a.n.data(), &s.vL, "shell0"},
      {&a.h5, &a.h6, Y5, {X1, X2, V, X4}, a.w1.data(), a.n1.data(), &s.L1, "shell1"},
      {&a.h7, &a.h8, Y7, {X1, X2, V, X4, Y5, Y6}, a.w2.data(), a.n2.data(), &s.L2, "shell2"},
  };
}

/// Jet variables per shell: the one-form slots minus the Killing directions
/// (x4, y6; no coefficient depends on them) plus the shell's v-coordinate.
std::vector<int> shell_vars(const ShellDesc& d) {
  std::vector<int> vars;
  for (int c : d.base)
    if (c != X4 && c != Y6) vars.push_back(c);
  vars.push_back(d.vcoord);
  return vars;
}

}  // namespace

SourceSpec SourceSpec::from_upsilons(ScalarField u2, ScalarField u4, ScalarField u6,
                                     ScalarField u8) {
  SourceSpec s;
  s.ups2 = u2;
  s.ups4 = u4;
  s.ups6 = u6;
  s.ups8 = u8;
  s.hL = u4 + u6 + u8;
  s.vL = u2 + u6 + u8;
  s.L1 = u2 + u4 + u8;
  s.L2 = u2 + u4 + u6;
  return s;
}

SourceSpec SourceSpec::from_lambdas(ScalarField hL, ScalarField vL, ScalarField L1,
                                    ScalarField L2) {
  // sum of the four lambdas is 3 * sum of upsilons
  ScalarField T = (1.0 / 3.0) * (hL + vL + L1 + L2);
  SourceSpec s;
  s.ups2 = T - hL;
  s.ups4 = T - vL;
  s.ups6 = T - L1;
  s.ups8 = T - L2;
  // keep the shallow inputs: these fields sit inside quadrature integrands
  s.hL = hL;
  s.vL = vL;
  s.L1 = L1;
  s.L2 = L2;
  return s;
}

std::vector<std::vector<double>> GridSpec::points() const {
  const int coord_of[5] = {X1, X2, V, Y5, Y7};
  std::vector<std::vector<double>> axis_vals(5);
  for (int a = 0; a < 5; ++a) {
    const Axis& ax = axes[a];
    for (int i = 0; i < ax.count; ++i) {
      double t = ax.count == 1 ? 0.5 : static_cast<double>(i) / (ax.count - 1);
      axis_vals[a].push_back(ax.lo + (ax.hi - ax.lo) * t);
    }
  }
  std::vector<std::vector<double>> pts;
  // v-like axes iterate innermost and ascending so quadrature caches extend
  for (double x1 : axis_vals[0])
    for (double x2 : axis_vals[1])
      for (double v : axis_vals[2])
        for (double y5 : axis_vals[3])
          for (double y7 : axis_vals[4]) {
            std::vector<double> p(8, 0.0);
            p[coord_of[0]] = x1;
            p[coord_of[1]] = x2;
            p[coord_of[2]] = v;
            p[coord_of[3]] = y5;
            p[coord_of[4]] = y7;
            pts.push_back(std::move(p));
          }
  return pts;
}

const ResidualReport::Family* ResidualReport::family(const std::string& name) const {
  for (const auto& f : families)
    if (f.name == name) return &f;
  return nullptr;
}

namespace {

ResidualReport eval_residual_points(const ShellAnsatz& a, const SourceSpec& s,
                                    const std::vector<std::vector<double>>& pts,
                                    bool keep_rows) {
  ResidualReport rep;
  std::vector<std::string> names = {"base"};
  auto sh = shells(a, s);
  for (const auto& d : sh) {
    names.push_back(d.tag + "_v");
    for (size_t k = 0; k < d.base.size(); ++k)
      names.push_back(d.tag + "_w" + std::to_string(k + 1));
    for (size_t k = 0; k < d.base.size(); ++k)
      names.push_back(d.tag + "_n" + std::to_string(k + 1));
  }
  rep.families.resize(names.size());
  for (size_t i = 0; i < names.size(); ++i) rep.families[i].name = names[i];

  const std::vector<int> xvars = {X1, X2};
  for (const auto& p : pts) {
    std::vector<double> row = {p[X1], p[X2], p[V], p[Y5], p[Y7]};
    size_t fam = 0;
    bool degenerate = false;

    // base family: -(1/2g1g2)[...] + hL
    {
      Jet G1 = a.g1.jet(p, xvars, 2), G2 = a.g2.jet(p, xvars, 2);
      double g1 = G1.value(), g2 = G2.value();
      if (std::abs(g1 * g2) < 1e-10) {
        degenerate = true;
      } else {
        double g1d1 = G1.deriv({X1}), g1d2 = G1.deriv({X2});
        double g2d1 = G2.deriv({X1}), g2d2 = G2.deriv({X2});
        double br = G2.deriv({X1, X1}) - g1d1 * g2d1 / (2 * g1) - g2d1 * g2d1 / (2 * g2) +
                    G1.deriv({X2, X2}) - g1d2 * g2d2 / (2 * g2) - g1d2 * g1d2 / (2 * g1);
        double r = -br / (2 * g1 * g2) + s.hL.value(p);
        rep.families[fam].max_abs = std::max(rep.families[fam].max_abs, std::abs(r));
        row.push_back(r);
      }
      ++fam;
    }

    for (const auto& d : sh) {
      std::vector<int> vars = shell_vars(d);
      Jet HA = d.ha->jet(p, vars, 2), HB = d.hb->jet(p, vars, 2);
      double ha = HA.value(), hb = HB.value();
      if (std::abs(ha * hb) < 1e-10) {
        degenerate = true;
        fam += 1 + 2 * d.base.size();
        continue;
      }
      double has = HA.deriv({d.vcoord});
      double hbs = HB.deriv({d.vcoord});
      double hbss = HB.deriv({d.vcoord, d.vcoord});
      double bracket = hbss - hbs * hbs / (2 * hb) - has * hbs / (2 * ha);
      double rv = -bracket / (2 * ha * hb) + d.source->value(p);
      rep.families[fam].max_abs = std::max(rep.families[fam].max_abs, std::abs(rv));
      row.push_back(rv);
      ++fam;

      for (size_t k = 0; k < d.base.size(); ++k) {
        double wk = d.w[k].value(p);
        double dk_ha = HA.deriv({d.base[k]});
        double dk_hb = HB.deriv({d.base[k]});
        double dk_hbs = HB.deriv({d.base[k], d.vcoord});
        double rw = wk / (2 * hb) * bracket +
                    hbs / (4 * hb) * (dk_ha / ha + dk_hb / hb) - dk_hbs / (2 * hb);
        rep.families[fam].max_abs = std::max(rep.families[fam].max_abs, std::abs(rw));
        row.push_back(rw);
        ++fam;
      }
      for (size_t k = 0; k < d.base.size(); ++k) {
        Jet NK = d.n[k].jet(p, {d.vcoord}, 2);
        double nks = NK.deriv({d.vcoord});
        double nkss = NK.deriv({d.vcoord, d.vcoord});
        double rn = hb / (2 * ha) * (nkss + (1.5 * hbs / hb - has / ha) * nks);
        rep.families[fam].max_abs = std::max(rep.families[fam].max_abs, std::abs(rn));
        row.push_back(rn);
        ++fam;
      }
    }
    if (degenerate) {
      ++rep.excluded;
    } else {
      ++rep.evaluated;
      if (keep_rows) rep.rows.push_back(std::move(row));
    }
  }
  for (const auto& f : rep.families) rep.max_abs = std::max(rep.max_abs, f.max_abs);
  return rep;
}

}  // namespace

ResidualReport shell_residuals(const ShellAnsatz& a, const SourceSpec& s, const GridSpec& grid,
                               bool keep_rows, int threads) {
  auto pts = grid.points();
  if (threads <= 1 || pts.size() <= 8) return eval_residual_points(a, s, pts, keep_rows);

  // deterministic split: chunk reports merged by max, rows kept in order
  int nthreads = std::min<int>(std::min<size_t>(threads, pts.size()), 16);
  std::vector<ResidualReport> parts(nthreads);
  std::vector<std::thread> pool;
  size_t chunk = (pts.size() + nthreads - 1) / nthreads;
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t]() {
      size_t lo = t * chunk, hi = std::min(pts.size(), lo + chunk);
      if (lo >= hi) return;
      parts[t] = eval_residual_points(
          a, s, std::vector<std::vector<double>>(pts.begin() + lo, pts.begin() + hi), keep_rows);
    });
  }
  for (auto& th : pool) th.join();
  ResidualReport rep;
  for (auto& part : parts) {
    if (part.families.empty()) continue;
    if (rep.families.empty()) rep.families = part.families;
    for (size_t i = 0; i < rep.families.size(); ++i)
      rep.families[i].max_abs = std::max(rep.families[i].max_abs, part.families[i].max_abs);
    rep.evaluated += part.evaluated;
    rep.excluded += part.excluded;
    rep.rows.insert(rep.rows.end(), std::make_move_iterator(part.rows.begin()),
                    std::make_move_iterator(part.rows.end()));
  }
  for (const auto& f : rep.families) rep.max_abs = std::max(rep.max_abs, f.max_abs);
  return rep;
}

ShellAnsatz generate_solution(const GeneratingData& gd, const SourceSpec& s) {
  ShellAnsatz a;
  a.g1 = gd.g1;
  a.g2 = gd.g2;

  struct ShellGen {
    const ScalarField* phi;
    const ScalarField* h0;
    const ScalarField* source;
    int vcoord;
    int hsign;        // +- branch of the h-quadrature
    int csign;        // companion sign (0 = from the field equation)
    double lower;
    std::vector<int> deps;  // coordinates this shell's data can depend on
    ScalarField* ha;  // companion (h3, h5, h7)
    ScalarField* hb;  // integrated (h4, h6, h8)
  };
  std::array<ShellGen, 3> gens = {{
      {&gd.phi0, &gd.h4_0, &s.vL, V, gd.sign4, gd.sign3, gd.v0, {X1, X2, V}, &a.h3, &a.h4},
      {&gd.phi1, &gd.h6_0, &s.L1, Y5, gd.sign6, gd.sign5, gd.y5_0, {X1, X2, V, Y5}, &a.h5,
       &a.h6},
      {&gd.phi2, &gd.h8_0, &s.L2, Y7, gd.sign8, gd.sign7, gd.y7_0, {X1, X2, V, Y5, Y7}, &a.h7,
       &a.h8},
  }};
  for (auto& g : gens) {
    ScalarField phis = g.phi->d(g.vcoord);
    ScalarField integrand = (2.0 * (phis * field_exp(2.0 * *g.phi))) / *g.source;
    *g.hb = quadrature_field(integrand, g.vcoord, g.lower, 2.0 * g.hsign, *g.h0, g.deps,
                             gd.quad_tol)
                .memoized();
    // companion from the v-equation: ha = phis * hb' / (2 Lambda hb)
    ScalarField hbs = (2.0 * g.hsign) * integrand;
    ScalarField natural = (phis * hbs) / (2.0 * (*g.source * *g.hb));
    *g.ha = (g.csign == 0 ? natural : static_cast<double>(g.csign) * field_abs(natural))
                .memoized();
  }

  // N-coefficients: w = d phi / d_v phi, n = n0 + n1 * int ha/|hb|^{3/2}
  auto fill = [&](const ScalarField& phi, int vcoord, const ScalarField& ha,
                  const ScalarField& hb, const std::vector<int>& base,
                  const std::vector<int>& deps, const ScalarField* n0, const ScalarField* n1,
                  ScalarField* wout, ScalarField* nout, double lower) {
    ScalarField phis = phi.d(vcoord);
    ScalarField integrand = ha / field_pow(field_abs(hb), 1.5);
    ScalarField integral = quadrature_field(integrand, vcoord, lower, 1.0,
                                            ScalarField::constant(0.0), deps, gd.quad_tol)
                               .memoized();
    for (size_t k = 0; k < base.size(); ++k) {
      wout[k] = (phi.d(base[k]) / phis).memoized();
      nout[k] = n1[k].is_constant(0.0) ? n0[k] : (n0[k] + n1[k] * integral).memoized();
    }
  };
  fill(gd.phi0, V, a.h3, a.h4, {X1, X2}, {X1, X2, V}, gd.n_0.data(), gd.n_1.data(), a.w.data(),
       a.n.data(), gd.v0);
  fill(gd.phi1, Y5, a.h5, a.h6, {X1, X2, V, X4}, {X1, X2, V, Y5}, gd.n1_0.data(),
       gd.n1_1.data(), a.w1.data(), a.n1.data(), gd.y5_0);
  fill(gd.phi2, Y7, a.h7, a.h8, {X1, X2, V, X4, Y5, Y6}, {X1, X2, V, Y5, Y7}, gd.n2_0.data(),
       gd.n2_1.data(), a.w2.data(), a.n2.data(), gd.y7_0);
  return a;
}

ResidualReport lc_constraints_check(const ShellAnsatz& a, const GridSpec& grid) {
  ResidualReport rep;
  struct Desc {
    const ScalarField* hb;
    int vcoord;
    std::vector<int> base;
    const ScalarField* w;
    const ScalarField* n;
    std::string tag;
  };
  std::vector<Desc> ds = {
      {&a.h4, V, {X1, X2}, a.w.data(), a.n.data(), "shell0"},
      {&a.h6, Y5, {X1, X2, V, X4}, a.w1.data(), a.n1.data(), "shell1"},
      {&a.h8, Y7, {X1, X2, V, X4, Y5, Y6}, a.w2.data(), a.n2.data(), "shell2"},
  };
  for (const auto& d : ds) {
    rep.families.push_back({d.tag + "_w_vs_lnh", 0.0});
    rep.families.push_back({d.tag + "_w_curl", 0.0});
    rep.families.push_back({d.tag + "_n_vstar", 0.0});
    rep.families.push_back({d.tag + "_n_curl", 0.0});
  }

  auto pts = grid.points();
  for (const auto& p : pts) {
    ++rep.evaluated;
    size_t fam = 0;
    for (const auto& d : ds) {
      std::vector<int> vars;
      for (int c : d.base)
        if (c != X4 && c != Y6) vars.push_back(c);
      vars.push_back(d.vcoord);
      Jet HB = d.hb->jet(p, vars, 1);
      double hb = HB.value();
      if (std::abs(hb) < 1e-10) {
        fam += 4;
        ++rep.excluded;
        continue;
      }
      std::vector<Jet> wj, nj;
      std::vector<double> wv, nv;
      for (size_t k = 0; k < d.base.size(); ++k) {
        wj.push_back(d.w[k].jet(p, vars, 1));
        nj.push_back(d.n[k].jet(p, vars, 1));
        wv.push_back(wj.back().value());
        nv.push_back(nj.back().value());
      }
      // adapted derivative along slot k at value level for a jet of order 1:
      auto e_k = [&](const Jet& f, size_t k) {
        double out = f.deriv({d.base[k]});
        out -= wv[k] * f.deriv({d.vcoord});
        // the paired n-coefficient acts along the shell's second fiber
        // direction, on which nothing depends (Killing symmetry)
        return out;
      };
      double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
      for (size_t k = 0; k < d.base.size(); ++k) {
        c1 = std::max(c1, std::abs(wj[k].deriv({d.vcoord}) - e_k(HB, k) / hb));
        c3 = std::max(c3, std::abs(nj[k].deriv({d.vcoord})));
        for (size_t l = 0; l < k; ++l) {
          c2 = std::max(c2, std::abs(e_k(wj[l], k) - e_k(wj[k], l)));
          c4 = std::max(c4, std::abs(nj[l].deriv({d.base[k]}) - nj[k].deriv({d.base[l]})));
        }
      }
      rep.families[fam].max_abs = std::max(rep.families[fam].max_abs, c1);
      rep.families[fam + 1].max_abs = std::max(rep.families[fam + 1].max_abs, c2);
      rep.families[fam + 2].max_abs = std::max(rep.families[fam + 2].max_abs, c3);
      rep.families[fam + 3].max_abs = std::max(rep.families[fam + 3].max_abs, c4);
      fam += 4;
    }
  }
  for (const auto& f : rep.families) rep.max_abs = std::max(rep.max_abs, f.max_abs);
  return rep;
}

ShellAnsatz polarization_deform(const ShellAnsatz& primary, const Polarizations& eta) {
  ShellAnsatz out = primary;
  out.g1 = eta.eta_i[0] * primary.g1;
  out.g2 = eta.eta_i[1] * primary.g2;
  out.h3 = eta.eta_a[0] * primary.h3;
  out.h4 = eta.eta_a[1] * primary.h4;
  for (int k = 0; k < 2; ++k) {
    out.w[k] = eta.eta3_i[k] * primary.w[k];
    const auto& e4 = eta.has_eta4 ? eta.eta4_i[k] : eta.eta3_i[k];
    out.n[k] = e4 * primary.n[k];
  }
  return out;
}

DMetric dmetric_from_shell0(const ShellAnsatz& a, const Chart& chart) {
  DMetric dm = DMetric::make(chart, {X1, X2}, {V, X4});
  dm.gf(0, 0) = a.g1;
  dm.gf(1, 1) = a.g2;
  dm.hf(0, 0) = a.h3;
  dm.hf(1, 1) = a.h4;
  for (int k = 0; k < 2; ++k) {
    dm.Nf(0, k) = a.w[k];
    dm.Nf(1, k) = a.n[k];
  }
  return dm;
}

DMetric dmetric_from_shell1(const ShellAnsatz& a, const Chart& chart) {
  CoordMetric base4 = assemble_coordinate_metric(dmetric_from_shell0(a, chart));
  DMetric dm = DMetric::make(chart, {X1, X2, V, X4}, {Y5, Y6});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) dm.gf(i, j) = base4.at(i, j);
  dm.hf(0, 0) = a.h5;
  dm.hf(1, 1) = a.h6;
  for (int k = 0; k < 4; ++k) {
    dm.Nf(0, k) = a.w1[k];
    dm.Nf(1, k) = a.n1[k];
  }
  return dm;
}

}  // namespace finslerforge
