#pragma once

#include <vector>

#include "finslerforge/linalg.hpp"
#include "finslerforge/solver.hpp"

namespace finslerforge {

/// Diagonal trapping profile on the y5 axis: conformal factor phi^2 and
/// the scaled fiber warp l*sqrt(|hbar|), with the source polynomials and
/// their conservation residual.
struct BraneProfile {
  double eps = 1.0;    // brane width
  double a = 1.0;      // asymptotic constant, phi^2 -> a
  double M = 1.0;      // fundamental mass scale
  double Lambda = 1.0; // cosmological constant
  int m = 2;           // extra-dimension count (>= 2)
  double phi0 = 1.0;   // free profile parameter of the source polynomials

  double phi2(double s) const;   // phi^2(y5)
  double lhbar(double s) const;  // l* sqrt(|hbar|)(y5), equals 1 at s = 0
  double hbar_l2(double s) const { return lhbar(s) * lhbar(s); }  // l*^2 hbar

  /// Source polynomials K1, K2 scaled by M^-(m+2).
  double K1M(double s) const;
  double K2M(double s) const;

  /// |dK1/ds - 4 (K2 - K1) dln|phi|/ds| at s, derivatives taken by AD of
  /// the closed forms.
  double conservation_residual(double s) const;
};

/// Profile from (M, Lambda): eps^2 = 40 M^4 / (3 Lambda). When solve_a is
/// set, a is root-found on (0, 100] so that d^2 phi/ds^2 vanishes at
/// s = eps (bisection, tolerance 1e-12); otherwise a_input is used.
BraneProfile brane_profile(double M, double Lambda, int m, double phi0, bool solve_a,
                           double a_input);

struct BraneSample {
  double y5, phi2, lhbar, K1M, K2M, cons_residual;
};

struct BraneReport {
  std::vector<BraneSample> samples;
  double max_cons_residual = 0.0;
};

BraneReport brane_sources_and_conservation(const BraneProfile& p, double lo, double hi,
                                           int count);

/// Off-diagonal brane metric: shell-0 block from the ansatz, fiber entries
/// l*^2 (hbar/phi^2) qh_a, border and B-blocks from the one-forms with
/// dx-legs only. Point is an 8-d chart point.
Mat<double> assemble_brane_metric(const ShellAnsatz& a, const BraneProfile& p,
                                  const std::array<ScalarField, 4>& qh,
                                  const std::vector<double>& point);

/// Diagonal profile metric: phi^2 eta_{alpha beta} on the 4-d block and
/// -l*^2 hbar diag(1, 1, s7, s8) on the fibers.
Mat<double> diagonal_profile_metric(const BraneProfile& p, int sign7, int sign8, double y5);

}  // namespace finslerforge
