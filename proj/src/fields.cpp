#include "finslerforge/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

namespace finslerforge {

ScalarField ScalarField::constant(double v) {
  ScalarField f;
  f.is_const_ = true;
  f.const_v_ = v;
  return f;
}

ScalarField ScalarField::from_expr(Expr e) {
  ScalarField f;
  f.expr_ = std::move(e);
  return f;
}

ScalarField ScalarField::from_fn(Fn fn) {
  ScalarField f;
  f.fn_ = std::move(fn);
  return f;
}

Jet ScalarField::jet(const std::vector<double>& point, const std::vector<int>& wrt,
                     int order) const {
  if (is_const_) return Jet::constant(JetSpace::get(wrt, order), const_v_);
  if (fn_) return fn_(point, wrt, order);
  if (!expr_.empty()) return eval_jet_unchecked(expr_, point, order, wrt);
  throw std::logic_error("empty scalar field evaluated");
}

double ScalarField::value(const std::vector<double>& point) const {
  if (is_const_) return const_v_;
  if (!expr_.empty() && !fn_) return eval(expr_, point);
  return jet(point, {}, 0).value();
}

namespace {

ScalarField combine(const ScalarField& a, const ScalarField& b, int op) {
  return ScalarField::from_fn([a, b, op](const std::vector<double>& p,
                                         const std::vector<int>& wrt, int order) {
    Jet x = a.jet(p, wrt, order);
    Jet y = b.jet(p, wrt, order);
    switch (op) {
      case 0: return x + y;
      case 1: return x - y;
      case 2: return x * y;
      default: return x / y;
    }
  });
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) { return combine(a, b, 0); }
ScalarField operator-(const ScalarField& a, const ScalarField& b) { return combine(a, b, 1); }
ScalarField operator*(const ScalarField& a, const ScalarField& b) { return combine(a, b, 2); }
ScalarField operator/(const ScalarField& a, const ScalarField& b) { return combine(a, b, 3); }

ScalarField operator*(double s, const ScalarField& a) {
  return ScalarField::from_fn(
      [s, a](const std::vector<double>& p, const std::vector<int>& wrt, int order) {
        return a.jet(p, wrt, order) * s;
      });
}

ScalarField ScalarField::memoized() const {
  ScalarField self = *this;
  struct Cache {
    std::mutex mu;
    std::map<std::string, Jet> entries;
  };
  auto cache = std::make_shared<Cache>();
  return ScalarField::from_fn(
      [self, cache](const std::vector<double>& p, const std::vector<int>& wrt, int order) {
        std::string key(reinterpret_cast<const char*>(p.data()), p.size() * sizeof(double));
        for (int v : wrt) key.push_back(static_cast<char>('0' + v));
        key.push_back(static_cast<char>('0' + order));
        {
          std::lock_guard<std::mutex> lock(cache->mu);
          auto it = cache->entries.find(key);
          if (it != cache->entries.end()) return it->second;
        }
        Jet j = self.jet(p, wrt, order);
        std::lock_guard<std::mutex> lock(cache->mu);
        cache->entries.emplace(std::move(key), j);
        return j;
      });
}

ScalarField ScalarField::d(int coord) const {
  ScalarField self = *this;
  return ScalarField::from_fn(
      [self, coord](const std::vector<double>& p, const std::vector<int>& wrt, int order) {
        std::vector<int> vars = wrt;
        if (std::find(vars.begin(), vars.end(), coord) == vars.end()) vars.push_back(coord);
        Jet up = self.jet(p, vars, order + 1);
        Jet dj = up.d(coord);
        // project to the requested space
        auto sp = JetSpace::get(wrt, order);
        Jet out = Jet::constant(sp, 0.0);
        const auto& usp = dj.space();
        for (int r = 0; r < sp->size(); ++r) {
          MultiIndex e = sp->exponent(r);
          MultiIndex eu{};
          for (int s = 0; s < sp->nvars(); ++s) {
            int slot = usp->var_slot(sp->vars()[s]);
            eu[slot] = e[s];
          }
          out.coeff(r) = dj.coeff(usp->rank_of(eu));
        }
        return out;
      });
}

ScalarField field_exp(const ScalarField& a) {
  return ScalarField::from_fn(
      [a](const std::vector<double>& p, const std::vector<int>& wrt, int order) {
        return exp(a.jet(p, wrt, order));
      });
}

ScalarField field_abs(const ScalarField& a) {
  return ScalarField::from_fn(
      [a](const std::vector<double>& p, const std::vector<int>& wrt, int order) {
        Jet j = a.jet(p, wrt, order);
        return j.value() < 0.0 ? -j : j;
      });
}

ScalarField field_pow(const ScalarField& a, double e) {
  return ScalarField::from_fn(
      [a, e](const std::vector<double>& p, const std::vector<int>& wrt, int order) {
        return pow(a.jet(p, wrt, order), e);
      });
}

// ---------------------------------------------------------------------------
// adaptive Simpson
// ---------------------------------------------------------------------------

namespace {

using Vec = std::vector<double>;

Vec vadd(Vec a, const Vec& b) {
  for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

double vdiff_max(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Vec simpson(const Vec& fa, const Vec& fm, const Vec& fb, double h) {
  Vec out(fa.size());
  for (size_t i = 0; i < fa.size(); ++i) out[i] = h / 6.0 * (fa[i] + 4.0 * fm[i] + fb[i]);
  return out;
}

void adapt(const std::function<Vec(double)>& f, double a, double b, const Vec& fa, const Vec& fm,
           const Vec& fb, const Vec& whole, double tol, int depth, Vec& acc) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  Vec flm = f(lm), frm = f(rm);
  Vec left = simpson(fa, flm, fm, m - a);
  Vec right = simpson(fm, frm, fb, b - m);
  Vec sum = vadd(left, right);
  if (depth <= 0 || vdiff_max(sum, whole) <= 15.0 * tol) {
    for (size_t i = 0; i < acc.size(); ++i)
      acc[i] += sum[i] + (sum[i] - whole[i]) / 15.0;
    return;
  }
  adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1, acc);
  adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1, acc);
}

}  // namespace

std::vector<double> integrate_adaptive(const std::function<Vec(double)>& f, double a, double b,
                                       double abs_tol, int max_depth) {
  if (a == b) return Vec(f(a).size(), 0.0);
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  Vec fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  Vec whole = simpson(fa, fm, fb, b - a);
  Vec acc(fa.size(), 0.0);
  adapt(f, a, b, fa, fm, fb, whole, abs_tol, max_depth, acc);
  if (sign < 0)
    for (double& x : acc) x = -x;
  return acc;
}

double integrate_adaptive_scalar(const std::function<double(double)>& f, double a, double b,
                                 double abs_tol, int max_depth) {
  auto vf = [&](double t) { return Vec{f(t)}; };
  return integrate_adaptive(vf, a, b, abs_tol, max_depth)[0];
}

// ---------------------------------------------------------------------------
// quadrature-backed field
// ---------------------------------------------------------------------------

namespace {

struct QuadCache {
  std::mutex mu;
  // key: transverse point bytes + vars/order; value: (v_reached, coeffs)
  std::map<std::string, std::pair<double, Vec>> entries;
};

std::string cache_key(const std::vector<double>& point, int vcoord,
                      const std::vector<int>& deps, const std::vector<int>& xvars, int order) {
  std::string key;
  key.reserve(deps.size() * 8 + xvars.size() + 2);
  for (int c : deps) {
    if (c == vcoord) continue;
    double v = point[c];
    key.append(reinterpret_cast<const char*>(&v), sizeof(double));
  }
  for (int v : xvars) key.push_back(static_cast<char>('0' + v));
  key.push_back(static_cast<char>('0' + order));
  return key;
}

}  // namespace

ScalarField quadrature_field(ScalarField integrand, int vcoord, double v0, double scale,
                             ScalarField addend, std::vector<int> deps, double abs_tol) {
  auto cache = std::make_shared<QuadCache>();
  return ScalarField::from_fn([integrand, vcoord, v0, scale, addend, abs_tol, cache, deps](
                                  const std::vector<double>& point, const std::vector<int>& wrt,
                                  int order) {
    auto sp = JetSpace::get(wrt, order);
    std::vector<int> xvars;
    for (int v : sp->vars())
      if (v != vcoord) xvars.push_back(v);
    auto xsp = JetSpace::get(xvars, order);
    int vslot = sp->var_slot(vcoord);

    // transverse coefficients: quadrature of the integrand's transverse jet
    const double vhere = point[vcoord];
    Vec xcoeffs;
    {
      std::lock_guard<std::mutex> lock(cache->mu);
      std::string key = cache_key(point, vcoord, deps, xvars, order);
      auto it = cache->entries.find(key);
      double vstart = v0;
      Vec base(xsp->size(), 0.0);
      if (it != cache->entries.end()) {
        vstart = it->second.first;
        base = it->second.second;
      }
      if (vstart != vhere) {
        auto f = [&](double t) {
          std::vector<double> q = point;
          q[vcoord] = t;
          Jet j = integrand.jet(q, xvars, order);
          Vec out(xsp->size());
          for (int r = 0; r < xsp->size(); ++r) out[r] = j.coeff(r);
          return out;
        };
        Vec delta = integrate_adaptive(f, vstart, vhere, abs_tol);
        base = vadd(std::move(base), delta);
      }
      cache->entries[key] = {vhere, base};
      xcoeffs = std::move(base);
    }

    Jet out = addend.empty() ? Jet::constant(sp, 0.0) : addend.jet(point, wrt, order);
    Jet ij;  // integrand full jet, fetched lazily for v-carrying coefficients
    bool have_ij = false;
    for (int r = 0; r < sp->size(); ++r) {
      MultiIndex e = sp->exponent(r);
      int vm = (vslot >= 0) ? e[vslot] : 0;
      if (vm == 0) {
        // match exponent in the transverse space
        MultiIndex ex{};
        for (int s = 0; s < xsp->nvars(); ++s) ex[s] = e[sp->var_slot(xsp->vars()[s])];
        out.coeff(r) += scale * xcoeffs[xsp->rank_of(ex)];
      } else {
        if (!have_ij) {
          ij = integrand.jet(point, sp->vars(), order >= 1 ? order - 1 : 0);
          have_ij = true;
        }
        MultiIndex el = e;
        el[vslot] -= 1;
        int rl = ij.space()->rank_of(el);
        out.coeff(r) += scale * ij.coeff(rl) / vm;
      }
    }
    return out;
  });
}

}  // namespace finslerforge
