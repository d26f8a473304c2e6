#pragma once

#include <array>
#include <string>

#include "finslerforge/dconnection.hpp"
#include "finslerforge/metric.hpp"

namespace finslerforge {

/// Coefficient functions of the 2+2+2+2 splitting on the 8-d chart
/// (x1, x2, v = x3, x4 | y5..y8). Killing symmetry: nothing depends on
/// x4, y6 or y8.
struct ShellAnsatz {
  ScalarField g1, g2;              // x1, x2
  ScalarField h3, h4;              // x1, x2, v
  ScalarField h5, h6;              // x1, x2, v, y5
  ScalarField h7, h8;              // x1, x2, v, y5, y7
  std::array<ScalarField, 2> w, n;    // shell-0 N-coefficients over dx1, dx2
  std::array<ScalarField, 4> w1, n1;  // shell-1, over dx1, dx2, dv, dx4
  std::array<ScalarField, 6> w2, n2;  // shell-2, over dx1, dx2, dv, dx4, dy5, dy6
};

/// Diagonal sources and their shell sums.
struct SourceSpec {
  ScalarField ups2, ups4, ups6, ups8;
  ScalarField hL, vL, L1, L2;

  static SourceSpec from_upsilons(ScalarField u2, ScalarField u4, ScalarField u6,
                                  ScalarField u8);
  /// Inverse of the shell-sum map (the 4x4 system is invertible: each sum
  /// omits exactly one upsilon).
  static SourceSpec from_lambdas(ScalarField hL, ScalarField vL, ScalarField L1,
                                 ScalarField L2);
};

/// Generating functions, integration functions and branch signs feeding the
/// quadrature solution.
struct GeneratingData {
  ScalarField g1, g2;               // base block (e.g. eps * exp(psi))
  ScalarField phi0, phi1, phi2;     // generating functions per shell
  ScalarField h4_0, h6_0, h8_0;     // integration functions of the h-quadratures
  std::array<ScalarField, 2> n_0, n_1;      // shell-0 n_k integration functions
  std::array<ScalarField, 4> n1_0, n1_1;    // shell-1
  std::array<ScalarField, 6> n2_0, n2_1;    // shell-2
  int sign4 = 1, sign6 = 1, sign8 = 1;      // +- branch of each h-quadrature
  int sign3 = 0, sign5 = 0, sign7 = 0;      // 0: companion sign from the field equation
  double v0 = 0.0, y5_0 = 0.0, y7_0 = 0.0;  // quadrature lower limits
  double quad_tol = 1e-10;
};

struct GridSpec {
  struct Axis {
    double lo = 0.0, hi = 0.0;
    int count = 1;
  };
  // axes over x1, x2, v, y5, y7 (remaining coordinates pinned to 0)
  std::array<Axis, 5> axes;

  std::vector<std::vector<double>> points() const;
};

struct ResidualReport {
  struct Family {
    std::string name;
    double max_abs = 0.0;
  };
  std::vector<Family> families;
  double max_abs = 0.0;
  int evaluated = 0;
  int excluded = 0;  // degenerate grid points (reported, never silently skipped)
  // per grid point: x1 x2 v y5 y7 then one column per family
  std::vector<std::vector<double>> rows;

  const Family* family(const std::string& name) const;
};

/// Residuals of the separated field equations on a grid: the base-block
/// equation against hL, one v-equation per shell against vL/L1/L2, and the
/// w- and n-equation families per shell.
ResidualReport shell_residuals(const ShellAnsatz& a, const SourceSpec& s, const GridSpec& grid,
                               bool keep_rows = false, int threads = 1);

/// Exact solution by quadrature from generating data.
ShellAnsatz generate_solution(const GeneratingData& gd, const SourceSpec& s);

/// Levi-Civita constraint checks (torsion-vanishing conditions) per shell.
ResidualReport lc_constraints_check(const ShellAnsatz& a, const GridSpec& grid);

struct Polarizations {
  std::array<ScalarField, 2> eta_i;   // base block
  std::array<ScalarField, 2> eta_a;   // h3, h4
  std::array<ScalarField, 2> eta3_i;  // N^3 coefficients
  std::array<ScalarField, 2> eta4_i;  // N^4 coefficients (defaults to eta3)
  bool has_eta4 = false;
};

/// Polarization deformation of the shell-0 block of a primary ansatz.
ShellAnsatz polarization_deform(const ShellAnsatz& primary, const Polarizations& eta);

/// Shell-0 block as a 2+2 d-metric (cross-module checks against the
/// curvature engine).
DMetric dmetric_from_shell0(const ShellAnsatz& a, const Chart& chart);

/// Shell-1 block as a 4+2 d-metric whose base is the assembled shell-0
/// coordinate metric.
DMetric dmetric_from_shell1(const ShellAnsatz& a, const Chart& chart);

}  // namespace finslerforge
