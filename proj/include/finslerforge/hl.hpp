#pragma once

#include <array>
#include <optional>

#include "finslerforge/expr.hpp"
#include "finslerforge/linalg.hpp"

namespace finslerforge {

struct HLConstants {
  double kappa = 1.0;
  double mu = 1.0;
  double varpi = 1.0;
  double Lambda = 1.0;
  double lambda = 1.0;
  double eta = 0.0;
  double c = 1.0;
  int z = 3;
};

/// ADM field content on the spacetime chart (t = x1, spatial x2..x4):
/// projectable lapse N(t), shift N^i(t, x) and spatial metric g_ij(t, x).
struct HLFields {
  Expr lapse;
  std::array<Expr, 3> shift;
  std::array<Expr, 9> g3;  // row-major spatial metric
  HLConstants k;
  bool projectable = true;
};

struct AdmPair {
  Mat<double> before;  // assembled 4x4 at the point
  Mat<double> after;   // assembled from the anisotropically rescaled fields
  double lapse_scaled, lapse_raw;
  std::array<double, 3> shift_scaled, shift_raw;
};

/// Assembles the ADM 4-metric and applies the z = 3 scaling rule
/// N -> l^-2 N, N^i -> l^-2 N^i, g_ij -> g_ij.
AdmPair adm_assemble_and_scale(const HLFields& f, const std::vector<double>& point, double l);

struct Invariants3 {
  Mat<double> K;       // extrinsic curvature K_ij
  double trK = 0.0;
  Mat<double> ricci;   // 3-d Ricci R_ij
  double R = 0.0;
  Mat<double> cotton;  // C^ij, symmetrized Cotton-York form
};

Invariants3 curvature_invariants_3d(const HLFields& f, const std::vector<double>& point);

struct ActionDensity {
  double kinetic = 0.0;
  double potential = 0.0;
};

/// Pointwise kinetic and detailed-balance potential densities of the action.
ActionDensity hl_action_density(const HLFields& f, const std::vector<double>& point);

struct GrLimit {
  double c, G, Lambda_gr;
};

/// Speed of light, Newton constant and cosmological constant recovered in
/// the infrared limit. Throws DomainError at the lambda = 1/3 pole and when
/// Lambda/(1-3 lambda) < 0 (imaginary speed).
GrLimit gr_limit_constants(double kappa, double mu, double Lambda, double lambda);

enum class MdrBranch {
  ScalarLowP,
  ScalarHighP,
  TensorDetailedBalance,
  ScalarUvBeyond,
  TensorBeyond,
};

const char* mdr_branch_name(MdrBranch b);
std::optional<MdrBranch> mdr_branch_from_name(const std::string& name);

/// omega^2 of the requested perturbation branch. `sign` (+1/-1) selects the
/// +-p^5 term and is required for the tensor branches.
double mdr_omega2(MdrBranch branch, const HLConstants& k, double p, int sign = 0);

}  // namespace finslerforge
