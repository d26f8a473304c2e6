#include "finslerforge/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace finslerforge {

namespace {

std::uint64_t pack(const MultiIndex& e) {
  std::uint64_t k = 0;
  for (int i = 0; i < 8; ++i) k |= static_cast<std::uint64_t>(e[i]) << (8 * i);
  return k;
}

int total(const MultiIndex& e) {
  int t = 0;
  for (int i = 0; i < 8; ++i) t += e[i];
  return t;
}

void compositions(int nvars, int slot, int remaining, MultiIndex& cur,
                  std::vector<MultiIndex>& out) {
  if (slot == nvars - 1) {
    cur[slot] = static_cast<std::uint8_t>(remaining);
    out.push_back(cur);
    cur[slot] = 0;
    return;
  }
  for (int k = remaining; k >= 0; --k) {
    cur[slot] = static_cast<std::uint8_t>(k);
    compositions(nvars, slot + 1, remaining - k, cur, out);
  }
  cur[slot] = 0;
}

void enumerate(int nvars, int order, std::vector<MultiIndex>& out) {
  // graded: all multi-indices of degree 0, then 1, ... so truncation is a prefix
  MultiIndex cur{};
  for (int deg = 0; deg <= order; ++deg) compositions(nvars, 0, deg, cur, out);
}

double factorial_of(const MultiIndex& e) {
  double f = 1.0;
  for (int i = 0; i < 8; ++i)
    for (int k = 2; k <= e[i]; ++k) f *= k;
  return f;
}

}  // namespace

JetSpace::JetSpace(std::vector<int> vars, int order)
    : vars_(std::move(vars)), order_(order) {
  if (vars_.size() > 8) throw std::invalid_argument("jet space supports at most 8 variables");
  if (order_ < 0 || order_ > 6) throw std::invalid_argument("jet order must be in 0..6");
  enumerate(std::max<int>(1, nvars()), order_, exps_);
  if (vars_.empty()) exps_.assign(1, MultiIndex{});  // constants only
  prefix_.assign(order_ + 1, 0);
  lookup_.reserve(exps_.size());
  for (int r = 0; r < size(); ++r) lookup_.emplace_back(pack(exps_[r]), r);
  std::sort(lookup_.begin(), lookup_.end());
  for (int k = 0; k <= order_; ++k) {
    int n = 0;
    while (n < size() && total(exps_[n]) <= k) ++n;
    prefix_[k] = n;
  }
  for (int a = 0; a < size(); ++a) {
    int da = total(exps_[a]);
    for (int b = 0; b < size(); ++b) {
      if (da + total(exps_[b]) > order_) continue;
      MultiIndex t{};
      for (int i = 0; i < 8; ++i) t[i] = static_cast<std::uint8_t>(exps_[a][i] + exps_[b][i]);
      mul_plan_.push_back({a, b, rank_of(t)});
    }
  }
}

int JetSpace::var_slot(int coord) const {
  for (int i = 0; i < nvars(); ++i)
    if (vars_[i] == coord) return i;
  return -1;
}

int JetSpace::rank_of(const MultiIndex& e) const {
  auto key = pack(e);
  auto it = std::lower_bound(lookup_.begin(), lookup_.end(), key,
                             [](const std::pair<std::uint64_t, int>& p, std::uint64_t k) {
                               return p.first < k;
                             });
  if (it == lookup_.end() || it->first != key) return -1;
  return it->second;
}

std::shared_ptr<const JetSpace> JetSpace::get(std::vector<int> vars, int order) {
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  static std::mutex mu;
  static std::map<std::pair<std::vector<int>, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(vars, order);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto sp = std::shared_ptr<const JetSpace>(new JetSpace(std::move(vars), order));
  cache.emplace(std::move(key), sp);
  return sp;
}

Jet Jet::constant(JetSpacePtr sp, double v) {
  Jet j(std::move(sp));
  j.c_[0] = v;
  return j;
}

Jet Jet::variable(JetSpacePtr sp, int coord, double value) {
  Jet j(std::move(sp));
  j.c_[0] = value;
  if (j.sp_->order() >= 1) {
    int slot = j.sp_->var_slot(coord);
    if (slot >= 0) {
      MultiIndex e{};
      e[slot] = 1;
      j.c_[j.sp_->rank_of(e)] = 1.0;
    }
  }
  return j;
}

void Jet::check_same(const Jet& a, const Jet& b) {
  if (a.sp_ != b.sp_) throw std::logic_error("jet operands live in different spaces");
}

double Jet::deriv(const std::vector<int>& coords) const {
  MultiIndex e{};
  for (int c : coords) {
    int slot = sp_->var_slot(c);
    if (slot < 0) return 0.0;
    e[slot] += 1;
  }
  int r = sp_->rank_of(e);
  if (r < 0) throw std::out_of_range("derivative order exceeds jet order");
  return c_[r] * factorial_of(e);
}

Jet Jet::d(int coord) const {
  if (sp_->order() == 0) throw std::out_of_range("cannot differentiate an order-0 jet");
  auto lower = JetSpace::get(sp_->vars(), sp_->order() - 1);
  Jet out(lower);
  int slot = sp_->var_slot(coord);
  if (slot < 0) return out;
  for (int r = 0; r < lower->size(); ++r) {
    MultiIndex e = lower->exponent(r);
    e[slot] += 1;
    int s = sp_->rank_of(e);
    out.c_[r] = c_[s] * e[slot];
  }
  return out;
}

Jet Jet::truncate(int order) const {
  if (order >= sp_->order()) return *this;
  auto lower = JetSpace::get(sp_->vars(), order);
  Jet out(lower);
  // graded enumeration makes truncation a prefix copy
  std::copy(c_.begin(), c_.begin() + lower->size(), out.c_.begin());
  return out;
}

Jet Jet::operator-() const {
  Jet out = *this;
  for (double& x : out.c_) x = -x;
  return out;
}

Jet& Jet::operator+=(const Jet& o) {
  check_same(*this, o);
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  check_same(*this, o);
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator+=(double s) {
  c_[0] += s;
  return *this;
}

Jet& Jet::operator-=(double s) {
  c_[0] -= s;
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& x : c_) x *= s;
  return *this;
}

Jet& Jet::operator/=(double s) {
  if (s == 0.0) throw DomainError("division by zero");
  for (double& x : c_) x /= s;
  return *this;
}

Jet operator-(double a, Jet b) {
  for (double& x : b.c_) x = -x;
  b.c_[0] += a;
  return b;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet::check_same(a, b);
  Jet out(a.sp_);
  for (const auto& t : a.sp_->mul_plan()) out.c_[t.target] += a.c_[t.a] * b.c_[t.b];
  return out;
}

Jet Jet::compose(const Jet& u, const std::vector<double>& derivs) {
  // f(u) = sum_k f^(k)(u0)/k! * (u - u0)^k, truncated; Horner over utilde
  Jet ut = u;
  ut.c_[0] = 0.0;
  int K = u.sp_->order();
  double kfac = 1.0;
  std::vector<double> dk(K + 1);
  for (int k = 0; k <= K; ++k) {
    if (k > 1) kfac *= k;
    dk[k] = derivs[k] / kfac;
  }
  Jet res = Jet::constant(u.sp_, dk[K]);
  for (int k = K - 1; k >= 0; --k) {
    res = res * ut;
    res.c_[0] += dk[k];
  }
  return res;
}

Jet Jet::int_pow(long long n) const {
  // n >= 0, truncated binary exponentiation
  Jet base = *this;
  Jet acc = Jet::constant(sp_, 1.0);
  long long m = n;
  while (m > 0) {
    if (m & 1) acc = acc * base;
    m >>= 1;
    if (m) base = base * base;
  }
  return acc;
}

Jet jet_pow_int(const Jet& u, long long n) {
  if (n >= 0) return u.int_pow(n);
  if (u.value() == 0.0) throw DomainError("negative power of zero");
  return (1.0 / u).int_pow(-n);
}

Jet operator/(const Jet& a, const Jet& b) { return a * (1.0 / b); }

Jet operator/(double a, const Jet& b) {
  double u0 = b.value();
  if (u0 == 0.0) throw DomainError("division by zero");
  int K = b.sp_->order();
  std::vector<double> d(K + 1);
  double p = 1.0 / u0, sign = 1.0, kfac = 1.0;
  for (int k = 0; k <= K; ++k) {
    if (k > 0) {
      kfac *= k;
      p /= u0;
      sign = -sign;
    }
    d[k] = (k == 0) ? 1.0 / u0 : sign * kfac * p;
  }
  Jet r = Jet::compose(b, d);
  return r *= a;
}

Jet sqrt(const Jet& u) {
  double u0 = u.value();
  if (u0 < 0.0) throw DomainError("sqrt of negative value");
  if (u0 == 0.0) {
    if (u.sp_->order() == 0) return Jet::constant(u.sp_, 0.0);
    throw DomainError("sqrt of zero with derivatives requested");
  }
  return pow(u, 0.5);
}

Jet exp(const Jet& u) {
  int K = u.sp_->order();
  std::vector<double> d(K + 1, std::exp(u.value()));
  return Jet::compose(u, d);
}

Jet log(const Jet& u) {
  double u0 = u.value();
  if (u0 <= 0.0) throw DomainError("log of non-positive value");
  int K = u.sp_->order();
  std::vector<double> d(K + 1);
  d[0] = std::log(u0);
  double p = 1.0, sign = 1.0, kfac = 1.0;
  for (int k = 1; k <= K; ++k) {
    p /= u0;
    if (k > 1) {
      kfac *= (k - 1);
    }
    d[k] = sign * kfac * p;
    sign = -sign;
  }
  return Jet::compose(u, d);
}

Jet sin(const Jet& u) {
  int K = u.sp_->order();
  double s = std::sin(u.value()), c = std::cos(u.value());
  std::vector<double> d(K + 1);
  const double cyc[4] = {s, c, -s, -c};
  for (int k = 0; k <= K; ++k) d[k] = cyc[k % 4];
  return Jet::compose(u, d);
}

Jet cos(const Jet& u) {
  int K = u.sp_->order();
  double s = std::sin(u.value()), c = std::cos(u.value());
  std::vector<double> d(K + 1);
  const double cyc[4] = {c, -s, -c, s};
  for (int k = 0; k <= K; ++k) d[k] = cyc[k % 4];
  return Jet::compose(u, d);
}

Jet abs(const Jet& u) {
  if (u.value() == 0.0) throw DomainError("abs at zero is not differentiable");
  return u.value() > 0.0 ? u : -u;
}

Jet pow(const Jet& u, double e) {
  double r = std::round(e);
  if (std::abs(e - r) < 1e-12 && std::abs(r) < 64) {
    return jet_pow_int(u, static_cast<long long>(r));
  }
  double u0 = u.value();
  if (u0 <= 0.0) throw DomainError("non-integer power of non-positive base");
  int K = u.sp_->order();
  std::vector<double> d(K + 1);
  double coef = 1.0;
  for (int k = 0; k <= K; ++k) {
    d[k] = coef * std::pow(u0, e - k);
    coef *= (e - k);
  }
  return Jet::compose(u, d);
}

}  // namespace finslerforge
