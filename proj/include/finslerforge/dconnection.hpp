#pragma once

#include <vector>

#include "finslerforge/metric.hpp"

namespace finslerforge {

/// Canonical d-connection coefficients at a point.
struct DConnection {
  int nb = 0, nf = 0;
  std::vector<double> L_h;  // L^i_jk   [i][j][k]
  std::vector<double> L_v;  // L^a_bk   [a][b][k]
  std::vector<double> C_h;  // C^i_jc   [i][j][c]
  std::vector<double> C_v;  // C^a_bc   [a][b][c]

  double Lh(int i, int j, int k) const { return L_h[(i * nb + j) * nb + k]; }
  double Lv(int a, int b, int k) const { return L_v[(a * nf + b) * nb + k]; }
  double Ch(int i, int j, int c) const { return C_h[(i * nb + j) * nf + c]; }
  double Cv(int a, int b, int c) const { return C_v[(a * nf + b) * nf + c]; }
};

/// Anholonomy data of the N-adapted frame.
struct FrameData {
  int nb = 0, nf = 0;
  std::vector<double> W;      // W^b_{ia} = d_a N^b_i   [b][i][a]
  std::vector<double> Omega;  // Omega^a_{ij}           [a][i][j]

  double Wm(int b, int i, int a) const { return W[(b * nb + i) * nf + a]; }
  double Om(int a, int i, int j) const { return Omega[(a * nb + i) * nb + j]; }
};

/// Nontrivial torsion blocks of the canonical d-connection.
struct TorsionPack {
  int nb = 0, nf = 0;
  std::vector<double> T_hhh;  // T^i_jk (identically zero)
  std::vector<double> T_hhv;  // T^i_ja = C^i_ja
  std::vector<double> T_vhh;  // T^a_ji = -Omega^a_ji
  std::vector<double> T_vvh;  // T^a_bi = L^a_bi - d_b N^a_i
  std::vector<double> T_vvv;  // T^a_bc (identically zero)
};

/// Distortion from the canonical d-connection to Levi-Civita, full n^3
/// array in the adapted frame, [up][object][direction].
struct Distortion {
  int n = 0;
  std::vector<double> Z;
  double z(int up, int obj, int dir) const { return Z[(up * n + obj) * n + dir]; }
};

struct CurvaturePack {
  int n = 0, nb = 0, nf = 0;
  std::vector<double> R;  // [up][obj][dir1][dir2]
  Mat<double> ricci;      // R_{alpha beta} blocks per the d-tensor contractions
  double hscalar = 0.0;   // g^{ij} R_ij
  double vscalar = 0.0;   // h^{ab} R_ab
  double scalar = 0.0;    // sum of the two
  Mat<double> einstein;

  double r(int a, int b, int c, int d) const { return R[((a * n + b) * n + c) * n + d]; }
};

/// Frame-connection coefficients as jets (internal exchange type).
struct ConnectionJets {
  int nb = 0, nf = 0;
  std::vector<int> coords;   // local -> chart coordinate
  std::vector<Jet> Gamma;    // n^3 [up][obj][dir]
  std::vector<Jet> Nj;       // nf x nb N-coefficient jets (one order above Gamma)

  int n() const { return nb + nf; }
  const Jet& gamma(int u, int o, int d) const { return Gamma[(u * n() + o) * n() + d]; }
  Jet& gamma(int u, int o, int d) { return Gamma[(u * n() + o) * n() + d]; }
};

DConnection canonical_dconnection(const DMetric& dm, const std::vector<double>& point);

FrameData nonholonomic_frames(const DMetric& dm, const std::vector<double>& point);

/// Torsion blocks plus the distortion tensor whose addition to the canonical
/// d-connection reproduces the Levi-Civita connection in the adapted frame.
struct TorsionDistortion {
  TorsionPack torsion;
  Distortion distortion;
};
TorsionDistortion torsion_and_distortion(const DMetric& dm, const std::vector<double>& point);

/// Coordinate Christoffel symbols of an arbitrary coordinate metric field
/// (the independent Levi-Civita oracle). [up][obj][dir] over cm.coords.
std::vector<double> levicivita_oracle(const CoordMetric& cm, const std::vector<double>& point);

/// Riemann/Ricci/Einstein of the coordinate Levi-Civita connection.
CurvaturePack levicivita_curvature(const CoordMetric& cm, const std::vector<double>& point);

/// Coordinate connection transformed to the N-adapted frame, [up][obj][dir].
std::vector<double> frame_transform_connection(const DMetric& dm,
                                               const std::vector<double>& coord_conn,
                                               const std::vector<double>& point);

/// Curvature, Ricci d-tensor, scalars and Einstein d-tensor of the canonical
/// d-connection in the N-adapted frame.
CurvaturePack curvature_and_ricci(const DMetric& dm, const std::vector<double>& point);

/// Same curvature kernel applied to the distorted connection Gamma_hat + Z
/// (the Levi-Civita connection seen in the adapted frame).
CurvaturePack levicivita_frame_curvature(const DMetric& dm, const std::vector<double>& point);

/// Max-norm of the d-covariant derivative of the d-metric (compatibility).
double compat_residual(const DMetric& dm, const std::vector<double>& point);

/// Same residual for a perturbed connection (used to show the check detects
/// non-compatible connections).
double compat_residual_perturbed(const DMetric& dm, const std::vector<double>& point, int up,
                                 int obj, int dir, double delta);

}  // namespace finslerforge
