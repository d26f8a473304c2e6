#pragma once

#include <optional>
#include <vector>

#include "finslerforge/dconnection.hpp"
#include "finslerforge/metric.hpp"

namespace finslerforge {

class DegenerateHessianError : public std::runtime_error {
 public:
  explicit DegenerateHessianError(double det)
      : std::runtime_error("degenerate Hessian, |det| = " + std::to_string(std::abs(det))),
        det_(det) {}
  double det() const { return det_; }

 private:
  double det_;
};

/// Fiber Hessian (1/2) d^2 F^2 / dy^i dy^j of a squared generating function.
/// Throws DegenerateHessianError when |det| <= 1e-12 and rejects the zero
/// section for non-quadratic generating functions.
Mat<double> hessian_metric(const Expr& F2, const Chart& chart, const std::vector<double>& point);

struct SprayData {
  std::vector<double> G;  // semi-spray components, one per fiber direction
  Mat<double> N;          // canonical N-connection N^a_j
};

/// Semi-spray G^k = 1/4 g^{kj}(y^i d2L/dy^j dx^i - dL/dx^j), L = F^2, and the
/// canonical N-connection N^a_j = dG^a/dy^j.
SprayData semi_spray_and_nconnection(const Expr& F2, const Chart& chart,
                                     const std::vector<double>& point);

/// D-metric on the tangent-bundle chart induced by a generating function:
/// g = h = fiber Hessian of F^2, N canonical, fiber block scaled by lstar.
DMetric dmetric_from_finsler(const Expr& F2, const Chart& chart, double lstar = 1.0);

/// D-metric of a quadratic generating function g_ij(x) y^i y^j given the
/// base metric expressions; N is Christoffel-linear and evaluated in closed
/// form (no high-order chains needed).
DMetric dmetric_from_quadratic(const std::vector<Expr>& base_g, const Chart& chart,
                               double lstar = 1.0);

/// Coefficient-tensor description of a modified dispersion relation.
struct MdrSpec {
  std::vector<Expr> g_spatial;  // 3x3 row-major, functions of x, spatial fiber block
  struct QTerm {
    std::vector<int> slots;  // 2r fiber slots in 1..4 (1 = time direction)
    double value;
  };
  std::vector<QTerm> q;
  int r = 1;
  double c = 1.0;
};

/// Squared generating function of Eq-type
/// F^2 = -(c y^1)^2 + Q [1 + (1/r) P / Q^r], Q = g_ij y^i y^j spatial,
/// P the q-contraction.
Expr finsler_from_mdr(const MdrSpec& spec, const Chart& chart);

/// Dispersion form evaluated on a spatial wave vector.
double mdr_omega2_dispersion(const MdrSpec& spec, const std::vector<double>& x,
                             const std::vector<double>& k3);

struct GeodesicSample {
  double tau;
  std::vector<double> x, y;
};

/// Fixed-step RK4 integration of d2x/dtau2 + 2 G(x, dx/dtau) = 0.
std::vector<GeodesicSample> geodesic_integrate(const Expr& F2, const Chart& chart,
                                               std::vector<double> x0, std::vector<double> y0,
                                               double tau_end, double step,
                                               int sample_every = 1);

}  // namespace finslerforge
