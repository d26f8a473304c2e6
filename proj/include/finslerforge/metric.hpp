#pragma once

#include <vector>

#include "finslerforge/chart.hpp"
#include "finslerforge/fields.hpp"
#include "finslerforge/linalg.hpp"

namespace finslerforge {

/// N-adapted metric record on a (base + fiber) chart: base block g_ij, fiber
/// block h_ab, N-connection coefficients N^a_i and the length constant that
/// scales the fiber block. Blocks are scalar fields so the same machinery
/// serves expression-backed, Finsler-derived and generated metrics.
struct DMetric {
  Chart chart;
  std::vector<int> base_idx, fiber_idx;
  std::vector<ScalarField> g;  // nb x nb, row-major
  std::vector<ScalarField> h;  // nf x nf
  std::vector<ScalarField> N;  // nf x nb
  double lstar = 1.0;

  int nb() const { return static_cast<int>(base_idx.size()); }
  int nf() const { return static_cast<int>(fiber_idx.size()); }
  int dim() const { return nb() + nf(); }

  ScalarField& gf(int i, int j) { return g[i * nb() + j]; }
  const ScalarField& gf(int i, int j) const { return g[i * nb() + j]; }
  ScalarField& hf(int a, int b) { return h[a * nf() + b]; }
  const ScalarField& hf(int a, int b) const { return h[a * nf() + b]; }
  ScalarField& Nf(int a, int i) { return N[a * nb() + i]; }
  const ScalarField& Nf(int a, int i) const { return N[a * nb() + i]; }

  /// Chart coordinate of local index (base first, then fiber).
  int coord(int local) const {
    return local < nb() ? base_idx[local] : fiber_idx[local - nb()];
  }
  std::vector<int> engaged_coords() const;

  static DMetric make(Chart chart, std::vector<int> base, std::vector<int> fiber);
};

/// Coordinate-basis matrix field of the assembled metric:
/// upper-left g_ij + l*^2 h_ab N^a_i N^b_j, off blocks l*^2 h_ae N^e_j,
/// lower-right l*^2 h_ab.
struct CoordMetric {
  int n = 0;
  std::vector<int> coords;
  std::vector<ScalarField> g;  // n x n

  ScalarField& at(int i, int j) { return g[i * n + j]; }
  const ScalarField& at(int i, int j) const { return g[i * n + j]; }
};

CoordMetric assemble_coordinate_metric(const DMetric& dm);

/// Sasaki-type assembled matrix at a point.
Mat<double> sasaki_assemble(const DMetric& dm, const std::vector<double>& point);

/// Signature (positive count, negative count) of a symmetric matrix by
/// Jacobi eigenvalue iteration; the d-metric invariant requires it to be
/// constant across evaluated points of a session.
std::pair<int, int> metric_signature(Mat<double> m);

/// Values of all blocks at a point.
struct MetricValues {
  Mat<double> g, h, N;  // h already carries the l*^2 factor
};
MetricValues metric_values(const DMetric& dm, const std::vector<double>& point);

}  // namespace finslerforge
