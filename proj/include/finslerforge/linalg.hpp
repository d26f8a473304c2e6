#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "finslerforge/jet.hpp"

namespace finslerforge {

class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(double det)
      : std::runtime_error("singular matrix (pivot/determinant " + std::to_string(det) + ")"),
        det_(det) {}
  double det() const { return det_; }

 private:
  double det_;
};

inline double ring_zero(double) { return 0.0; }
inline double ring_one(double) { return 1.0; }
inline Jet ring_zero(const Jet& proto) { return Jet::constant(proto.space(), 0.0); }
inline Jet ring_one(const Jet& proto) { return Jet::constant(proto.space(), 1.0); }

/// Dense row-major matrix over double or Jet.
template <class T>
struct Mat {
  int n = 0, m = 0;
  std::vector<T> a;

  Mat() = default;
  Mat(int rows, int cols) : n(rows), m(cols), a(static_cast<size_t>(rows) * cols) {}
  Mat(int rows, int cols, const T& fill)
      : n(rows), m(cols), a(static_cast<size_t>(rows) * cols, fill) {}

  T& operator()(int i, int j) { return a[static_cast<size_t>(i) * m + j]; }
  const T& operator()(int i, int j) const { return a[static_cast<size_t>(i) * m + j]; }
};

/// Gauss-Jordan inverse with partial pivoting on |value|.
template <class T>
Mat<T> mat_inverse(Mat<T> A) {
  if (A.n != A.m) throw std::invalid_argument("mat_inverse needs a square matrix");
  const int n = A.n;
  Mat<T> I(n, n, ring_zero(A(0, 0)));
  for (int i = 0; i < n; ++i) I(i, i) = ring_one(A(0, 0));
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(value_of(A(col, col)));
    for (int r = col + 1; r < n; ++r) {
      double v = std::abs(value_of(A(r, col)));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < 1e-300) throw SingularMatrixError(0.0);
    if (piv != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(A(piv, j), A(col, j));
        std::swap(I(piv, j), I(col, j));
      }
    }
    T d = A(col, col);
    for (int j = 0; j < n; ++j) {
      A(col, j) = A(col, j) / d;
      I(col, j) = I(col, j) / d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      T f = A(r, col);
      if (value_of(f) == 0.0 && std::is_same_v<T, double>) continue;
      for (int j = 0; j < n; ++j) {
        A(r, j) = A(r, j) - f * A(col, j);
        I(r, j) = I(r, j) - f * I(col, j);
      }
    }
  }
  return I;
}

/// Determinant by LU with partial pivoting on |value|.
template <class T>
T mat_det(Mat<T> A) {
  if (A.n != A.m) throw std::invalid_argument("mat_det needs a square matrix");
  const int n = A.n;
  T det = ring_one(A(0, 0));
  double sign = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(value_of(A(col, col)));
    for (int r = col + 1; r < n; ++r) {
      double v = std::abs(value_of(A(r, col)));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) return ring_zero(A(0, 0));
    if (piv != col) {
      for (int j = col; j < n; ++j) std::swap(A(piv, j), A(col, j));
      sign = -sign;
    }
    det = det * A(col, col);
    for (int r = col + 1; r < n; ++r) {
      T f = A(r, col) / A(col, col);
      for (int j = col; j < n; ++j) A(r, j) = A(r, j) - f * A(col, j);
    }
  }
  return det * sign;
}

template <class T>
Mat<T> mat_mul(const Mat<T>& A, const Mat<T>& B) {
  if (A.m != B.n) throw std::invalid_argument("mat_mul shape mismatch");
  Mat<T> C(A.n, B.m, ring_zero(A(0, 0)));
  for (int i = 0; i < A.n; ++i)
    for (int k = 0; k < A.m; ++k)
      for (int j = 0; j < B.m; ++j) C(i, j) = C(i, j) + A(i, k) * B(k, j);
  return C;
}

inline Mat<double> mat_transpose(const Mat<double>& A) {
  Mat<double> T(A.m, A.n);
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.m; ++j) T(j, i) = A(i, j);
  return T;
}

inline double max_abs(const Mat<double>& A) {
  double m = 0.0;
  for (double v : A.a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace finslerforge
