#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "finslerforge/expr.hpp"
#include "finslerforge/jet.hpp"

namespace finslerforge {

/// A scalar field on a chart, queried for jets at points. Backed by an
/// expression, a constant, or a closure (generated solutions use quadrature
/// closures whose jets are assembled from integrand jets).
class ScalarField {
 public:
  using Fn = std::function<Jet(const std::vector<double>&, const std::vector<int>&, int)>;

  ScalarField() = default;
  static ScalarField constant(double v);
  static ScalarField from_expr(Expr e);
  static ScalarField from_fn(Fn fn);

  bool empty() const { return !fn_ && expr_.empty() && !is_const_; }

  Jet jet(const std::vector<double>& point, const std::vector<int>& wrt, int order) const;
  double value(const std::vector<double>& point) const;

  /// The backing expression when there is one (used for config echo).
  const Expr& expr() const { return expr_; }

  /// True when the field is the literal constant v.
  bool is_constant(double v) const { return is_const_ && const_v_ == v; }

  /// Memoizing wrapper caching jets per (point, vars, order).
  ScalarField memoized() const;

  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator/(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator*(double s, const ScalarField& a);

  /// Partial-derivative field d(this)/d(coord).
  ScalarField d(int coord) const;

 private:
  Expr expr_;
  Fn fn_;
  bool is_const_ = false;
  double const_v_ = 0.0;
};

ScalarField field_exp(const ScalarField& a);
ScalarField field_abs(const ScalarField& a);
ScalarField field_pow(const ScalarField& a, double e);

/// Adaptive Simpson quadrature of a vector-valued function on [a, b].
std::vector<double> integrate_adaptive(
    const std::function<std::vector<double>(double)>& f, double a, double b, double abs_tol,
    int max_depth = 28);

/// Scalar adaptive Simpson.
double integrate_adaptive_scalar(const std::function<double(double)>& f, double a, double b,
                                 double abs_tol, int max_depth = 28);

/// Field v -> addend(point) + scale * Int_{v0}^{v} integrand dv', with jets:
/// coefficients carrying the integration variable come from the integrand's
/// jet, pure transverse coefficients from quadrature of the integrand's
/// transverse jet. Results are cached per (transverse point, vars, order) and
/// extended cumulatively along v.
/// `deps` lists the chart coordinates the integrand genuinely depends on;
/// the transverse cache is keyed on exactly those (minus the integration
/// variable), so unrelated coordinates cannot thrash it.
ScalarField quadrature_field(ScalarField integrand, int vcoord, double v0, double scale,
                             ScalarField addend, std::vector<int> deps,
                             double abs_tol = 1e-10);

}  // namespace finslerforge
