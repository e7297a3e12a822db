#include "levyem/stable_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "levyem/error.hpp"
#include "levyem/sampling.hpp"

namespace levyem {

namespace {

using boost::math::quadrature::gauss_kronrod;
using boost::math::quadrature::tanh_sinh;

constexpr double kPi = M_PI;
constexpr double kHalfPi = M_PI / 2.0;

template <class F>
double gk(F f, double a, double b, double tol = 1e-13) {
  if (!(b > a)) return 0.0;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 12, tol);
}

}  // namespace

SymmetricStableLaw::SymmetricStableLaw(double alpha) : alpha_(alpha) { validate_alpha(alpha); }

double SymmetricStableLaw::mean_abs() const {
  return 2.0 * std::tgamma(1.0 - 1.0 / alpha_) / kPi;
}

double SymmetricStableLaw::tail_coefficient(int k) const {
  const double sign = (k % 2 == 1) ? 1.0 : -1.0;
  return (2.0 / kPi) * sign * std::exp(std::lgamma(alpha_ * k) - std::lgamma(k + 1.0)) *
         std::sin(k * kPi * alpha_ / 2.0);
}

double SymmetricStableLaw::density_at_zero() const {
  return std::tgamma(1.0 / alpha_) / (kPi * alpha_);
}

bool SymmetricStableLaw::series_tail(double x, double& out) const {
  // P(Z > x) = 1/2 - (1/(pi alpha)) sum_k (-1)^k Gamma((2k+1)/alpha) x^{2k+1} / (2k+1)!
  if (x > 1.0) return false;
  if (x == 0.0) {
    out = 0.5;
    return true;
  }
  double sum = 0.0;
  const double lx = std::log(x);
  for (int k = 0; k < 200; ++k) {
    const double m = 2.0 * k + 1.0;
    const double term = std::exp(std::lgamma(m / alpha_) - std::lgamma(m + 1.0) + m * lx);
    sum += (k % 2 == 0) ? term : -term;
    if (term < 1e-18 * std::abs(sum)) {
      out = 0.5 - sum / (kPi * alpha_);
      return true;
    }
  }
  return false;
}

bool SymmetricStableLaw::asymptotic_abs_tail(double x, double& out) const {
  if (x < 4.0) return false;
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 60; ++k) {
    const double term = tail_coefficient(k) * std::pow(x, -alpha_ * k);
    // sin(k pi alpha / 2) can vanish; compare envelopes, not raw terms
    const double env = std::exp(std::lgamma(alpha_ * k) - std::lgamma(k + 1.0)) *
                       std::pow(x, -alpha_ * k);
    if (env > prev) return false;
    prev = env;
    sum += term;
    if (env < 1e-17 * std::abs(sum)) {
      out = sum;
      return true;
    }
  }
  return false;
}

bool SymmetricStableLaw::asymptotic_density(double x, double& out) const {
  // f(x) = (1/pi) sum_k (-1)^{k+1} Gamma(alpha k + 1)/k! sin(k pi alpha/2) x^{-alpha k - 1}
  if (x < 4.0) return false;
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 60; ++k) {
    const double env = std::exp(std::lgamma(alpha_ * k + 1.0) - std::lgamma(k + 1.0)) *
                       std::pow(x, -alpha_ * k - 1.0);
    if (env > prev) return false;
    prev = env;
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    sum += sign * env * std::sin(k * kPi * alpha_ / 2.0) / kPi;
    if (env < 1e-17 * std::abs(sum)) {
      out = sum;
      return true;
    }
  }
  return false;
}

namespace {

// u(phi) = c V(pi/2 - phi) in the Zolotarev representation, in log form.
struct ZolotarevKernel {
  double alpha;
  double log_c;

  double log_u(double phi) const {
    const double a = alpha;
    const double e = a / (a - 1.0);
    const double s = std::sin(phi);
    return log_c + e * (std::log(s) - std::log(std::sin(a * (kHalfPi - phi)))) +
           std::log(std::cos((a - 1.0) * (kHalfPi - phi))) - std::log(s);
  }

  // phi with log_u(phi) = target; log_u increases from -inf to +inf on (0, pi/2).
  double solve(double target) const {
    double lo = 0.0;
    double hi = kHalfPi;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (log_u(mid) < target) lo = mid;
      else hi = mid;
    }
    return 0.5 * (lo + hi);
  }
};

}  // namespace

double SymmetricStableLaw::zolotarev_tail(double x) const {
  const ZolotarevKernel k{alpha_, alpha_ / (alpha_ - 1.0) * std::log(x)};
  const double p1 = k.solve(0.0);
  const double p2 = k.solve(std::log(80.0));
  auto g = [&](double phi) {
    if (phi <= 0.0) return 1.0;
    return std::exp(-std::exp(k.log_u(phi)));
  };
  tanh_sinh<double> ts;
  double left = 0.0;
  if (p1 > 0.0) left = ts.integrate(g, 0.0, p1, 1e-13);
  const double right = gk(g, p1, p2);
  return (left + right) / kPi;
}

double SymmetricStableLaw::zolotarev_density(double x) const {
  const ZolotarevKernel k{alpha_, alpha_ / (alpha_ - 1.0) * std::log(x)};
  const double p0 = k.solve(std::log(1e-30));
  const double p1 = k.solve(0.0);
  const double p2 = k.solve(std::log(90.0));
  auto g = [&](double phi) {
    if (phi <= 0.0) return 0.0;
    const double u = std::exp(k.log_u(phi));
    return u * std::exp(-u);
  };
  const double integral = gk(g, p0, p1) + gk(g, p1, p2);
  return alpha_ / (kPi * (alpha_ - 1.0) * x) * integral;
}

double SymmetricStableLaw::upper_tail(double x) const {
  if (std::isnan(x)) return x;
  if (x < 0.0) return 1.0 - upper_tail(-x);
  if (std::isinf(x)) return 0.0;
  double out = 0.0;
  if (series_tail(x, out)) return out;
  if (asymptotic_abs_tail(x, out)) return 0.5 * out;
  return zolotarev_tail(x);
}

double SymmetricStableLaw::abs_tail(double x) const {
  detail::require(x >= 0.0, "abs_tail needs x >= 0");
  return 2.0 * upper_tail(x);
}

double SymmetricStableLaw::density(double x) const {
  x = std::abs(x);
  if (std::isinf(x)) return 0.0;
  if (x <= 1.0) {
    // f(x) = (1/(pi alpha)) sum_k (-1)^k Gamma((2k+1)/alpha) x^{2k} / (2k)!
    double sum = 0.0;
    for (int k = 0; k < 200; ++k) {
      const double m = 2.0 * k;
      const double term = std::exp(std::lgamma((m + 1.0) / alpha_) - std::lgamma(m + 1.0) +
                                   (k == 0 ? 0.0 : m * std::log(x)));
      sum += (k % 2 == 0) ? term : -term;
      if (term < 1e-18 * std::abs(sum)) return sum / (kPi * alpha_);
    }
  }
  double out = 0.0;
  if (asymptotic_density(x, out)) return out;
  return zolotarev_density(x);
}

double SymmetricStableLaw::abs_quantile_upper(double v) const {
  detail::require(v > 0.0 && v <= 1.0, "quantile level must lie in (0, 1]");
  if (v == 1.0) return 0.0;
  const double c1 = tail_coefficient(1);
  double x = v < 0.5 ? std::pow(c1 / v, 1.0 / alpha_) : (1.0 - v) / (2.0 * density_at_zero());
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  const double log_v = std::log(v);
  for (int it = 0; it < 100; ++it) {
    const double s = abs_tail(x);
    const double g = std::log(s) - log_v;
    if (g > 0.0) lo = std::max(lo, x);  // tail too big: x too small
    else hi = std::min(hi, x);
    if (g == 0.0) return x;
    const double dg = -2.0 * density(x) / s;
    double next = x - g / dg;
    if (!(next > lo && next < hi) || !std::isfinite(next))
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * std::max(x, 1.0);
    if (std::abs(next - x) <= 1e-15 * std::max(x, 1e-300)) return next;
    x = next;
  }
  throw NumericalError("stable quantile iteration did not converge", x);
}

double stable_abs_tail_by_inversion(double alpha, double x) {
  validate_alpha(alpha);
  detail::require(x >= 0.0, "x must be nonnegative");
  if (x == 0.0) return 1.0;
  const double upper = std::pow(45.0, 1.0 / alpha);
  const double panel = std::min(kPi / x, 0.5);
  auto f = [&](double l) {
    if (l == 0.0) return x;
    return std::sin(l * x) * std::exp(-std::pow(l, alpha)) / l;
  };
  double sum = 0.0;
  for (double a = 0.0; a < upper; a += panel) {
    sum += gauss_kronrod<double, 21>::integrate(f, a, std::min(a + panel, upper), 10, 1e-14);
  }
  return 1.0 - 2.0 / kPi * sum;
}

double stable_mean_abs_by_quadrature(double alpha) {
  validate_alpha(alpha);
  auto f = [&](double l) {
    if (l < 1e-100) return std::pow(l, alpha - 2.0);
    return -std::expm1(-std::pow(l, alpha)) / (l * l);
  };
  tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  const double a = ts.integrate(f, 0.0, 1.0, 1e-14);
  const double b = es.integrate([&](double l) { return f(l + 1.0); }, 1e-14);
  return 2.0 / kPi * (a + b);
}

ParetoStableCoupling::ParetoStableCoupling(double alpha, int intervals)
    : alpha_(alpha), n_(intervals) {
  validate_alpha(alpha);
  detail::require(intervals >= 16, "coupling table needs at least 16 intervals");
  const SymmetricStableLaw law(alpha);
  const double c1 = law.tail_coefficient(1);
  const double c2 = law.tail_coefficient(2);
  value_.assign(n_ + 1, 0.0);
  slope_.assign(n_ + 1, 0.0);
  // v -> 0: v = c1 y + c2 y^2 with y = x^{-alpha}, so h = c1^{1/alpha} (1 + c2 v/(alpha c1^2)) + ...
  value_[0] = std::pow(c1, 1.0 / alpha);
  slope_[0] = value_[0] * c2 / (alpha * c1 * c1);
  // v -> 1: x ~ (1 - v) / (2 f(0))
  value_[n_] = 0.0;
  slope_[n_] = -1.0 / (2.0 * law.density_at_zero());
  for (int j = 1; j < n_; ++j) {
    const double v = static_cast<double>(j) / n_;
    const double x = law.abs_quantile_upper(v);
    const double vp = std::pow(v, 1.0 / alpha);
    value_[j] = x * vp;
    slope_[j] = vp * (-1.0 / (2.0 * law.density(x)) + x / (alpha * v));
  }
}

double ParetoStableCoupling::h(double v) const noexcept {
  const double s = v * n_;
  int j = static_cast<int>(s);
  if (j >= n_) j = n_ - 1;
  if (j < 0) j = 0;
  const double t = s - j;
  const double w = 1.0 / n_;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * value_[j] + h10 * w * slope_[j] + h01 * value_[j + 1] + h11 * w * slope_[j + 1];
}

const ParetoStableCoupling& ParetoStableCoupling::shared(double alpha) {
  static std::mutex mu;
  static std::map<double, std::unique_ptr<ParetoStableCoupling>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(alpha);
  if (it == cache.end())
    it = cache.emplace(alpha, std::make_unique<ParetoStableCoupling>(alpha)).first;
  return *it->second;
}

}  // namespace levyem
