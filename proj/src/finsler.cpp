#include "finslerforge/finsler.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace finslerforge {

namespace {

bool zero_fiber_part(const Chart& chart, const std::vector<double>& point) {
  for (int ci : chart.fiber_indices())
    if (point[ci] != 0.0) return false;
  return true;
}

/// Fiber Hessian jets of order `order` from F^2 jets of order `order`+2.
Mat<Jet> hessian_jets(const Expr& F2, const Chart& chart, const std::vector<double>& point,
                      int order) {
  auto fib = chart.fiber_indices();
  Jet L = eval_jet_unchecked(F2, point, order + 2, chart.all_indices());
  const int nf = static_cast<int>(fib.size());
  Mat<Jet> H(nf, nf, Jet::constant(JetSpace::get(chart.all_indices(), order), 0.0));
  for (int i = 0; i < nf; ++i)
    for (int j = i; j < nf; ++j) {
      H(i, j) = L.d(fib[i]).d(fib[j]) * 0.5;
      H(j, i) = H(i, j);
    }
  return H;
}

/// Shared per-point cache of spray/N-connection jets for a generating
/// function, so the 16 N-field closures of a DMetric do not recompute the
/// (expensive) high-order chain.
struct SprayCache {
  Expr F2;
  Chart chart;
  std::mutex mu;
  std::map<std::pair<std::string, int>, std::vector<Jet>> njets;  // key: point bytes + order

  std::vector<Jet> njets_at(const std::vector<double>& point, int order) {
    std::string key(reinterpret_cast<const char*>(point.data()), point.size() * sizeof(double));
    std::lock_guard<std::mutex> lock(mu);
    auto it = njets.find({key, order});
    if (it != njets.end()) return it->second;

    auto base = chart.base_indices();
    auto fib = chart.fiber_indices();
    const int nb = static_cast<int>(base.size()), nf = static_cast<int>(fib.size());
    Jet L = eval_jet_unchecked(F2, point, order + 3, chart.all_indices());
    auto sp1 = JetSpace::get(chart.all_indices(), order + 1);
    Jet zero = Jet::constant(sp1, 0.0);

    Mat<Jet> g(nf, nf, zero);
    for (int i = 0; i < nf; ++i)
      for (int j = i; j < nf; ++j) {
        g(i, j) = L.d(fib[i]).d(fib[j]) * 0.5;
        g(j, i) = g(i, j);
      }
    Mat<Jet> ginv = mat_inverse(g);
    std::vector<Jet> G(nf, zero);
    for (int k = 0; k < nf; ++k) {
      Jet s = zero;
      for (int j = 0; j < nf; ++j) {
        Jet t = Jet::constant(sp1, 0.0);
        for (int i = 0; i < nb; ++i) {
          Jet yi = Jet::variable(sp1, fib[i], point[fib[i]]);
          t += yi * (L.d(fib[j]).d(base[i]).truncate(order + 1));
        }
        t -= L.d(base[j]).truncate(order + 1);
        s += ginv(k, j) * t;
      }
      G[k] = s * 0.25;
    }
    std::vector<Jet> N;
    N.reserve(nf * nb);
    for (int a = 0; a < nf; ++a)
      for (int j = 0; j < nb; ++j) N.push_back(G[a].d(fib[j]));
    njets.emplace(std::make_pair(std::move(key), order), N);
    return N;
  }
};

Jet project_jet(const Jet& src, const std::vector<int>& wrt, int order) {
  auto sp = JetSpace::get(wrt, order);
  Jet out = Jet::constant(sp, 0.0);
  const auto& usp = src.space();
  for (int r = 0; r < sp->size(); ++r) {
    MultiIndex e = sp->exponent(r);
    MultiIndex eu{};
    for (int s = 0; s < sp->nvars(); ++s) {
      int slot = usp->var_slot(sp->vars()[s]);
      if (slot < 0) throw std::logic_error("projection target has unknown variable");
      eu[slot] = e[s];
    }
    out.coeff(r) = src.coeff(usp->rank_of(eu));
  }
  return out;
}

}  // namespace

Mat<double> hessian_metric(const Expr& F2, const Chart& chart, const std::vector<double>& point) {
  auto fib = chart.fiber_indices();
  if (zero_fiber_part(chart, point)) {
    int deg = F2.poly_degree_in(fib);
    if (deg < 0 || deg > 2)
      throw EvalError("Hessian undefined on the zero section for a non-quadratic generating function",
                      -1);
  }
  Mat<Jet> H = hessian_jets(F2, chart, point, 0);
  const int nf = H.n;
  Mat<double> out(nf, nf);
  for (int i = 0; i < nf; ++i)
    for (int j = 0; j < nf; ++j) out(i, j) = H(i, j).value();
  double det = mat_det(out);
  if (std::abs(det) <= 1e-12) throw DegenerateHessianError(det);
  return out;
}

SprayData semi_spray_and_nconnection(const Expr& F2, const Chart& chart,
                                     const std::vector<double>& point) {
  // reject degenerate Hessians up front (also covers the zero section)
  hessian_metric(F2, chart, point);
  SprayCache cache;
  cache.F2 = F2;
  cache.chart = chart;
  auto base = chart.base_indices();
  auto fib = chart.fiber_indices();
  const int nb = static_cast<int>(base.size()), nf = static_cast<int>(fib.size());

  Jet L = eval_jet_unchecked(F2, point, 2, chart.all_indices());
  // order-0 metric values suffice for G
  Mat<double> gv(nf, nf);
  for (int i = 0; i < nf; ++i)
    for (int j = 0; j < nf; ++j) gv(i, j) = 0.5 * L.deriv({fib[i], fib[j]});
  Mat<double> ginv = mat_inverse(gv);

  SprayData sd;
  sd.G.assign(nf, 0.0);
  for (int k = 0; k < nf; ++k) {
    double s = 0.0;
    for (int j = 0; j < nf; ++j) {
      double t = 0.0;
      for (int i = 0; i < nb; ++i) t += point[fib[i]] * L.deriv({fib[j], base[i]});
      t -= L.deriv({base[j]});
      s += ginv(k, j) * t;
    }
    sd.G[k] = 0.25 * s;
  }
  std::vector<Jet> N = cache.njets_at(point, 0);
  sd.N = Mat<double>(nf, nb);
  for (int a = 0; a < nf; ++a)
    for (int j = 0; j < nb; ++j) sd.N(a, j) = N[a * nb + j].value();
  return sd;
}

DMetric dmetric_from_finsler(const Expr& F2, const Chart& chart, double lstar) {
  auto base = chart.base_indices();
  auto fib = chart.fiber_indices();
  DMetric dm = DMetric::make(chart, base, fib);
  dm.lstar = lstar;
  const int nb = dm.nb(), nf = dm.nf();
  auto cache = std::make_shared<SprayCache>();
  cache->F2 = F2;
  cache->chart = chart;
  for (int i = 0; i < nf; ++i)
    for (int j = 0; j < nf; ++j) {
      auto field = ScalarField::from_fn(
          [F2, chart, i, j](const std::vector<double>& p, const std::vector<int>& wrt,
                            int order) {
            Mat<Jet> H = hessian_jets(F2, chart, p, order);
            return project_jet(H(i, j), wrt, order);
          });
      dm.gf(i, j) = field;
      dm.hf(i, j) = field;
    }
  for (int a = 0; a < nf; ++a)
    for (int i = 0; i < nb; ++i)
      dm.Nf(a, i) = ScalarField::from_fn(
          [cache, a, i, nb](const std::vector<double>& p, const std::vector<int>& wrt,
                            int order) {
            std::vector<Jet> N = cache->njets_at(p, order);
            return project_jet(N[a * nb + i], wrt, order);
          });
  return dm;
}

DMetric dmetric_from_quadratic(const std::vector<Expr>& base_g, const Chart& chart,
                               double lstar) {
  auto base = chart.base_indices();
  auto fib = chart.fiber_indices();
  const int nb = static_cast<int>(base.size()), nf = static_cast<int>(fib.size());
  if (static_cast<int>(base_g.size()) != nb * nb)
    throw std::invalid_argument("base metric needs nb*nb expressions");
  DMetric dm = DMetric::make(chart, base, fib);
  dm.lstar = lstar;
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) {
      dm.gf(i, j) = ScalarField::from_expr(base_g[i * nb + j]);
      dm.hf(i, j) = dm.gf(i, j);
    }
  // N^a_j = gamma^a_{jm}(x) y^m with gamma the base Christoffels
  for (int a = 0; a < nf; ++a)
    for (int j = 0; j < nb; ++j)
      dm.Nf(a, j) = ScalarField::from_fn(
          [base_g, chart, base, fib, nb, a, j](const std::vector<double>& p,
                                               const std::vector<int>& wrt, int order) {
            auto sp = JetSpace::get(wrt, order);
            // Christoffel jets of the base metric
            Jet zero = Jet::constant(sp, 0.0);
            Mat<Jet> g(nb, nb, zero);
            std::vector<Jet> gj;
            gj.reserve(nb * nb);
            for (int r = 0; r < nb; ++r)
              for (int c = 0; c < nb; ++c) {
                gj.push_back(eval_jet_unchecked(base_g[r * nb + c], p, order + 1,
                                                chart.all_indices()));
                g(r, c) = project_jet(gj.back().truncate(order), wrt, order);
              }
            Mat<Jet> ginv = mat_inverse(g);
            Jet out = zero;
            for (int m = 0; m < nb; ++m) {
              Jet gamma = zero;
              for (int r = 0; r < nb; ++r) {
                Jet t = gj[m * nb + r].d(base[j]) + gj[j * nb + r].d(base[m]) -
                        gj[j * nb + m].d(base[r]);
                gamma += ginv(a, r) * project_jet(t, wrt, order);
              }
              Jet ym = Jet::variable(sp, fib[m], p[fib[m]]);
              out += gamma * 0.5 * ym;
            }
            return out;
          });
  return dm;
}

Expr finsler_from_mdr(const MdrSpec& spec, const Chart& chart) {
  if (spec.r < 1) throw std::invalid_argument("MDR degree r must be >= 1");
  auto fib = chart.fiber_indices();
  for (const auto& t : spec.q)
    if (static_cast<int>(t.slots.size()) != 2 * spec.r)
      throw std::invalid_argument("q entry rank does not match 2r");
  // Q = g_ij y^i y^j over the spatial fiber slots (2..4 <-> fib[1..3])
  Expr Q;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Expr term = spec.g_spatial[i * 3 + j] * Expr::var(fib[i + 1]) * Expr::var(fib[j + 1]);
      Q = Q.empty() ? term : Q + term;
    }
  Expr P;
  for (const auto& t : spec.q) {
    Expr term = Expr::constant(t.value);
    for (int s : t.slots) term = term * Expr::var(fib[s - 1]);
    P = P.empty() ? term : P + term;
  }
  Expr bracket = Expr::constant(1.0);
  if (!P.empty())
    bracket = bracket + Expr::constant(1.0 / spec.r) * (P / Expr::pow(Q, spec.r));
  Expr time_term =
      Expr::unary(Op::Neg, Expr::pow(Expr::constant(spec.c) * Expr::var(fib[0]), 2.0));
  return time_term + Q * bracket;
}

double mdr_omega2_dispersion(const MdrSpec& spec, const std::vector<double>& x,
                             const std::vector<double>& k3) {
  // omega^2 = c^2 (g k k) (1 - (1/r) q-contraction / (g k k)^r)
  double Q = 0.0;
  std::vector<double> pt = x;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) Q += eval(spec.g_spatial[i * 3 + j], pt) * k3[i] * k3[j];
  double P = 0.0;
  for (const auto& t : spec.q) {
    double term = t.value;
    for (int s : t.slots) {
      if (s == 1) {
        term = 0.0;  // no time slot in a spatial wave vector
        break;
      }
      term *= k3[s - 2];
    }
    P += term;
  }
  return spec.c * spec.c * Q * (1.0 - P / (spec.r * std::pow(Q, spec.r)));
}

std::vector<GeodesicSample> geodesic_integrate(const Expr& F2, const Chart& chart,
                                               std::vector<double> x0, std::vector<double> y0,
                                               double tau_end, double step, int sample_every) {
  auto base = chart.base_indices();
  auto fib = chart.fiber_indices();
  const int nb = static_cast<int>(base.size()), nf = static_cast<int>(fib.size());
  if (static_cast<int>(x0.size()) != nb || static_cast<int>(y0.size()) != nf)
    throw std::invalid_argument("geodesic initial data has wrong dimension");

  double prev_det = 0.0;
  auto accel = [&](const std::vector<double>& x, const std::vector<double>& y, double tau) {
    std::vector<double> pt(chart.size(), 0.0);
    for (int i = 0; i < nb; ++i) pt[base[i]] = x[i];
    for (int a = 0; a < nf; ++a) pt[fib[a]] = y[a];
    Jet L = eval_jet_unchecked(F2, pt, 2, chart.all_indices());
    Mat<double> g(nf, nf);
    for (int i = 0; i < nf; ++i)
      for (int j = 0; j < nf; ++j) g(i, j) = 0.5 * L.deriv({fib[i], fib[j]});
    double det = mat_det(g);
    // a sign flip between steps means the trajectory crossed a zero of det
    if (std::abs(det) <= 1e-12 || (prev_det != 0.0 && det * prev_det < 0.0) ||
        !std::isfinite(det))
      throw DegenerateHessianError(det);
    prev_det = det;
    Mat<double> ginv = mat_inverse(g);
    std::vector<double> acc(nf, 0.0);
    for (int k = 0; k < nf; ++k) {
      double s = 0.0;
      for (int j = 0; j < nf; ++j) {
        double t = 0.0;
        for (int i = 0; i < nb; ++i) t += y[i] * L.deriv({fib[j], base[i]});
        t -= L.deriv({base[j]});
        s += ginv(k, j) * t;
      }
      acc[k] = -2.0 * 0.25 * s;  // dy/dtau = -2 G
    }
    (void)tau;
    return acc;
  };

  std::vector<GeodesicSample> out;
  std::vector<double> x = std::move(x0), y = std::move(y0);
  int nsteps = static_cast<int>(std::llround(tau_end / step));
  out.push_back({0.0, x, y});
  for (int s = 1; s <= nsteps; ++s) {
    double tau = (s - 1) * step;
    try {
      auto k1x = y;
      auto k1y = accel(x, y, tau);
      std::vector<double> x2(nb), y2(nf);
      for (int i = 0; i < nb; ++i) x2[i] = x[i] + 0.5 * step * k1x[i];
      for (int i = 0; i < nf; ++i) y2[i] = y[i] + 0.5 * step * k1y[i];
      auto k2x = y2;
      auto k2y = accel(x2, y2, tau + 0.5 * step);
      std::vector<double> x3(nb), y3(nf);
      for (int i = 0; i < nb; ++i) x3[i] = x[i] + 0.5 * step * k2x[i];
      for (int i = 0; i < nf; ++i) y3[i] = y[i] + 0.5 * step * k2y[i];
      auto k3x = y3;
      auto k3y = accel(x3, y3, tau + 0.5 * step);
      std::vector<double> x4(nb), y4(nf);
      for (int i = 0; i < nb; ++i) x4[i] = x[i] + step * k3x[i];
      for (int i = 0; i < nf; ++i) y4[i] = y[i] + step * k3y[i];
      auto k4x = y4;
      auto k4y = accel(x4, y4, tau + step);
      for (int i = 0; i < nb; ++i)
        x[i] += step / 6.0 * (k1x[i] + 2 * k2x[i] + 2 * k3x[i] + k4x[i]);
      for (int i = 0; i < nf; ++i)
        y[i] += step / 6.0 * (k1y[i] + 2 * k2y[i] + 2 * k3y[i] + k4y[i]);
    } catch (const DegenerateHessianError& e) {
      throw EvalError("degenerate Hessian along trajectory at tau = " + std::to_string(tau), -1);
    }
    if (s % sample_every == 0 || s == nsteps) out.push_back({s * step, x, y});
  }
  return out;
}

}  // namespace finslerforge
