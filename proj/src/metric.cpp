#include "finslerforge/metric.hpp"

#include <cmath>

namespace finslerforge {

std::vector<int> DMetric::engaged_coords() const {
  std::vector<int> out = base_idx;
  out.insert(out.end(), fiber_idx.begin(), fiber_idx.end());
  return out;
}

DMetric DMetric::make(Chart chart, std::vector<int> base, std::vector<int> fiber) {
  DMetric dm;
  dm.chart = std::move(chart);
  dm.base_idx = std::move(base);
  dm.fiber_idx = std::move(fiber);
  dm.g.assign(dm.nb() * dm.nb(), ScalarField::constant(0.0));
  dm.h.assign(dm.nf() * dm.nf(), ScalarField::constant(0.0));
  dm.N.assign(dm.nf() * dm.nb(), ScalarField::constant(0.0));
  return dm;
}

CoordMetric assemble_coordinate_metric(const DMetric& dm) {
  const int nb = dm.nb(), nf = dm.nf(), n = dm.dim();
  const double l2 = dm.lstar * dm.lstar;
  CoordMetric cm;
  cm.n = n;
  cm.coords = dm.engaged_coords();
  cm.g.assign(n * n, ScalarField::constant(0.0));
  for (int i = 0; i < nb; ++i) {
    for (int j = 0; j < nb; ++j) {
      ScalarField s = dm.gf(i, j);
      for (int a = 0; a < nf; ++a)
        for (int b = 0; b < nf; ++b)
          s = s + l2 * (dm.hf(a, b) * dm.Nf(a, i) * dm.Nf(b, j));
      cm.at(i, j) = s;
    }
  }
  for (int i = 0; i < nb; ++i) {
    for (int a = 0; a < nf; ++a) {
      ScalarField s = ScalarField::constant(0.0);
      for (int b = 0; b < nf; ++b) s = s + l2 * (dm.hf(a, b) * dm.Nf(b, i));
      cm.at(i, nb + a) = s;
      cm.at(nb + a, i) = s;
    }
  }
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b) cm.at(nb + a, nb + b) = l2 * dm.hf(a, b);
  return cm;
}

Mat<double> sasaki_assemble(const DMetric& dm, const std::vector<double>& point) {
  CoordMetric cm = assemble_coordinate_metric(dm);
  Mat<double> M(cm.n, cm.n);
  for (int i = 0; i < cm.n; ++i)
    for (int j = 0; j < cm.n; ++j) M(i, j) = cm.at(i, j).value(point);
  return M;
}

std::pair<int, int> metric_signature(Mat<double> m) {
  const int n = m.n;
  // classical Jacobi sweeps; the blocks are tiny
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off = std::max(off, std::abs(m(i, j)));
    if (off < 1e-13) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(m(p, q)) < 1e-15) continue;
        double theta = 0.5 * std::atan2(2.0 * m(p, q), m(q, q) - m(p, p));
        double c = std::cos(theta), s = std::sin(theta);
        for (int k = 0; k < n; ++k) {
          double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
      }
  }
  int pos = 0, neg = 0;
  for (int i = 0; i < n; ++i) (m(i, i) > 0 ? pos : neg)++;
  return {pos, neg};
}

MetricValues metric_values(const DMetric& dm, const std::vector<double>& point) {
  const int nb = dm.nb(), nf = dm.nf();
  const double l2 = dm.lstar * dm.lstar;
  MetricValues mv{Mat<double>(nb, nb), Mat<double>(nf, nf), Mat<double>(nf, nb)};
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) mv.g(i, j) = dm.gf(i, j).value(point);
  for (int a = 0; a < nf; ++a)
    for (int b = 0; b < nf; ++b) mv.h(a, b) = l2 * dm.hf(a, b).value(point);
  for (int a = 0; a < nf; ++a)
    for (int i = 0; i < nb; ++i) mv.N(a, i) = dm.Nf(a, i).value(point);
  return mv;
}

}  // namespace finslerforge
