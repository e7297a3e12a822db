#pragma once

#include <cmath>
#include <vector>

namespace levyem {

// Symmetric alpha-stable law with characteristic function exp(-|l|^alpha),
// 1 < alpha < 2. Distribution and density come from the Zolotarev integral
// representation, a convergent power series near the origin and the
// asymptotic tail series far out.
class SymmetricStableLaw {
 public:
  explicit SymmetricStableLaw(double alpha);

  double alpha() const noexcept { return alpha_; }

  // P(Z > x)
  double upper_tail(double x) const;
  // P(|Z| > x), x >= 0
  double abs_tail(double x) const;
  double density(double x) const;
  // x >= 0 with P(|Z| > x) = v, 0 < v <= 1
  double abs_quantile_upper(double v) const;

  // E|Z| = 2 Gamma(1 - 1/alpha) / pi
  double mean_abs() const;
  // c_k in P(|Z| > x) ~ sum_k c_k x^{-alpha k}; tail_coefficient(1) is the Pareto-type constant.
  double tail_coefficient(int k) const;
  double density_at_zero() const;

 private:
  double zolotarev_tail(double x) const;     // P(Z > x), x > 0
  double zolotarev_density(double x) const;  // x > 0
  bool series_tail(double x, double& out) const;
  bool asymptotic_abs_tail(double x, double& out) const;
  bool asymptotic_density(double x, double& out) const;

  double alpha_;
};

// P(|Z| > x) = 1 - (2/pi) int_0^inf sin(l x) exp(-l^alpha) / l dl, by direct
// quadrature of the characteristic function. Independent of SymmetricStableLaw.
double stable_abs_tail_by_inversion(double alpha, double x);
// E|Z| = (2/pi) int_0^inf (1 - exp(-l^alpha)) / l^2 dl.
double stable_mean_abs_by_quadrature(double alpha);

// Comonotone map from a 1-D Pareto innovation sign * v^{-1/alpha} to a standard
// stable variate: zeta = sign * h(v) * v^{-1/alpha}, where h(v) v^{-1/alpha} is the
// upper v-quantile of |Z|. h is smooth on [0, 1] (h(0) = c_1^{1/alpha}, h(1) = 0)
// and is tabulated with cubic Hermite interpolation using exact derivatives.
class ParetoStableCoupling {
 public:
  explicit ParetoStableCoupling(double alpha, int intervals = 1024);

  double alpha() const noexcept { return alpha_; }
  double h(double v) const noexcept;
  double stable_from_parts(double v, double sign) const noexcept {
    return sign * h(v) * std::pow(v, -1.0 / alpha_);
  }
  // Same, with the Pareto radius r = v^{-1/alpha} already computed.
  double stable_from_radius(double v, double r, double sign) const noexcept {
    return sign * h(v) * r;
  }

  // Cached per alpha; construction is a few hundred milliseconds.
  static const ParetoStableCoupling& shared(double alpha);

 private:
  double alpha_;
  int n_;
  std::vector<double> value_;
  std::vector<double> slope_;
};

}  // namespace levyem
