#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace finslerforge {

/// Raised when an operation leaves the domain of a function (log of a
/// non-positive value, division by zero, sqrt of a negative, ...).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

using MultiIndex = std::array<std::uint8_t, 8>;

/// Descriptor for truncated Taylor expansions over a subset of chart
/// coordinates. Multi-indices are enumerated in graded order so that
/// truncation to a lower order is a prefix. Spaces are cached and shared.
class JetSpace {
 public:
  static std::shared_ptr<const JetSpace> get(std::vector<int> vars, int order);

  int order() const { return order_; }
  const std::vector<int>& vars() const { return vars_; }
  int size() const { return static_cast<int>(exps_.size()); }
  int nvars() const { return static_cast<int>(vars_.size()); }

  /// Slot of a chart coordinate inside this space, -1 when absent.
  int var_slot(int coord) const;

  const MultiIndex& exponent(int rank) const { return exps_[rank]; }
  /// Rank of a multi-index, -1 when it exceeds the truncation order.
  int rank_of(const MultiIndex& e) const;

  struct MulTerm {
    std::int32_t a, b, target;
  };
  const std::vector<MulTerm>& mul_plan() const { return mul_plan_; }

  /// Number of coefficients of total degree <= k (prefix length).
  int prefix_size(int k) const { return prefix_[k]; }

 private:
  JetSpace(std::vector<int> vars, int order);

  std::vector<int> vars_;
  int order_;
  std::vector<MultiIndex> exps_;
  std::vector<int> prefix_;
  std::vector<MulTerm> mul_plan_;
  // packed exponent -> rank
  std::vector<std::pair<std::uint64_t, int>> lookup_;
};

using JetSpacePtr = std::shared_ptr<const JetSpace>;

/// Truncated multivariate Taylor value: function value plus all mixed
/// partials (stored as Taylor coefficients) up to the space's order.
/// Order-0 jets behave exactly like plain reals.
class Jet {
 public:
  Jet() = default;
  static Jet constant(JetSpacePtr sp, double v);
  static Jet variable(JetSpacePtr sp, int coord, double value);

  bool valid() const { return static_cast<bool>(sp_); }
  const JetSpacePtr& space() const { return sp_; }
  double value() const { return c_.empty() ? 0.0 : c_[0]; }

  /// Mixed partial derivative value; `coords` lists differentiation
  /// coordinates with multiplicity, e.g. {i, j, j} for d^3/di djdj.
  double deriv(const std::vector<int>& coords) const;

  /// Derivative as a jet of one order lower.
  Jet d(int coord) const;
  /// Truncation to a lower order (same variables).
  Jet truncate(int order) const;

  double coeff(int rank) const { return c_[rank]; }
  double& coeff(int rank) { return c_[rank]; }

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator+=(double s);
  Jet& operator-=(double s);
  Jet& operator*=(double s);
  Jet& operator/=(double s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double b) { return a += b; }
  friend Jet operator-(Jet a, double b) { return a -= b; }
  friend Jet operator+(double a, Jet b) { return b += a; }
  friend Jet operator-(double a, Jet b);
  friend Jet operator*(Jet a, double b) { return a *= b; }
  friend Jet operator*(double a, Jet b) { return b *= a; }
  friend Jet operator/(Jet a, double b) { return a /= b; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator/(double a, const Jet& b);

  friend Jet sqrt(const Jet& u);
  friend Jet exp(const Jet& u);
  friend Jet log(const Jet& u);
  friend Jet sin(const Jet& u);
  friend Jet cos(const Jet& u);
  friend Jet abs(const Jet& u);
  friend Jet pow(const Jet& u, double e);

  /// Composition with a univariate function given its derivatives at
  /// u.value(): derivs[k] = f^(k)(u0), k = 0..order.
  static Jet compose(const Jet& u, const std::vector<double>& derivs);

 private:
  Jet(JetSpacePtr sp) : sp_(std::move(sp)), c_(sp_->size(), 0.0) {}
  static void check_same(const Jet& a, const Jet& b);
  Jet int_pow(long long n) const;
  friend Jet jet_pow_int(const Jet& u, long long n);

  JetSpacePtr sp_;
  std::vector<double> c_;
};

inline double value_of(double x) { return x; }
inline double value_of(const Jet& x) { return x.value(); }

}  // namespace finslerforge
