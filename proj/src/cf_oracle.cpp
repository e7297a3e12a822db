#include "levyem/cf_oracle.hpp"

#include <bit>
#include <cmath>
#include <mutex>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "levyem/error.hpp"
#include "levyem/sampling.hpp"

namespace levyem {

namespace {

constexpr double kPi = M_PI;

// int_U^inf cos(u) u^{-p} du and the sine analogue by repeated integration by parts.
double tail_cos(double p, double u, int depth);
double tail_sin(double q, double u, int depth) {
  if (depth == 0) return 0.0;
  return std::cos(u) * std::pow(u, -q) - q * tail_cos(q + 1.0, u, depth - 1);
}
double tail_cos(double p, double u, int depth) {
  if (depth == 0) return 0.0;
  return -std::sin(u) * std::pow(u, -p) + p * tail_sin(p + 1.0, u, depth - 1);
}

void check_lambda(double lambda) {
  detail::require(std::isfinite(lambda), "lambda must be finite");
}

}  // namespace

double pareto_cf_series(double alpha, double lambda) {
  validate_alpha(alpha);
  check_lambda(lambda);
  const double s = std::abs(lambda);
  if (s == 0.0) return 1.0;
  // 1 - phi = alpha s^alpha [ I - sum_k (-1)^{k+1} s^{2k-alpha} / ((2k)! (2k-alpha)) ],
  // I = int_0^inf (1 - cos u) u^{-1-alpha} du = -Gamma(2-alpha) cos(pi alpha/2) / (alpha (alpha-1))
  const double big_i =
      -std::tgamma(2.0 - alpha) * std::cos(kPi * alpha / 2.0) / (alpha * (alpha - 1.0));
  double partial = 0.0;
  const double ls = std::log(s);
  for (int k = 1; k < 400; ++k) {
    const double m = 2.0 * k;
    const double term = std::exp((m - alpha) * ls - std::lgamma(m + 1.0)) / (m - alpha);
    partial += (k % 2 == 1) ? term : -term;
    if (term < 1e-18 * std::abs(partial) && k > 1) break;
  }
  return 1.0 - alpha * std::pow(s, alpha) * (big_i - partial);
}

double pareto_cf_quadrature(double alpha, double lambda) {
  validate_alpha(alpha);
  check_lambda(lambda);
  const double s = std::abs(lambda);
  detail::require(s > 0.0, "quadrature route needs lambda != 0");
  // phi = alpha s^alpha int_s^inf cos(u) u^{-alpha-1} du
  const double p = alpha + 1.0;
  auto f = [p](double u) { return std::cos(u) * std::pow(u, -p); };
  using boost::math::quadrature::gauss_kronrod;
  const double u_end = std::max(s, 400.0);
  double sum = 0.0;
  double err_total = 0.0;
  double a = s;
  // panels end at the zeros (k + 1/2) pi of the cosine
  double k = std::floor(s / kPi - 0.5) + 1.0;
  while (a < u_end) {
    double b = (k + 0.5) * kPi;
    ++k;
    if (b <= a) continue;
    double err = 0.0;
    sum += gauss_kronrod<double, 21>::integrate(f, a, b, 8, 1e-15, &err);
    err_total += err;
    a = b;
  }
  sum += tail_cos(p, a, 12);
  const double scale = alpha * std::pow(s, alpha);
  const double achieved = scale * err_total;
  if (!(achieved <= 1e-9) || !std::isfinite(sum)) {
    std::ostringstream os;
    os << "pareto_cf quadrature missed 1e-9 at lambda = " << lambda << " (achieved " << achieved
       << ")";
    throw NumericalError(os.str(), achieved);
  }
  return scale * sum;
}

double pareto_cf(double alpha, double lambda) {
  const double s = std::abs(lambda);
  if (s <= 1.0) return pareto_cf_series(alpha, s);
  return pareto_cf_quadrature(alpha, s);
}

std::size_t ParetoCfCache::KeyHash::operator()(const Key& k) const noexcept {
  return static_cast<std::size_t>(mix64(k.a ^ mix64(k.l)));
}

double ParetoCfCache::get(double alpha, double lambda) {
  const Key key{std::bit_cast<std::uint64_t>(alpha), std::bit_cast<std::uint64_t>(std::abs(lambda))};
  {
    std::shared_lock lock(mu_);
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
  }
  const double v = pareto_cf(alpha, lambda);
  std::unique_lock lock(mu_);
  table_.emplace(key, v);
  return v;
}

std::size_t ParetoCfCache::size() const {
  std::shared_lock lock(mu_);
  return table_.size();
}

namespace {

void check_chain_steps(const StepSchedule& s, std::size_t n) {
  detail::require(n <= s.max_index(), "n exceeds the schedule length");
  for (std::size_t j = 1; j <= n; ++j) {
    if (!(s.gamma(j) < 1.0)) {
      std::ostringstream os;
      os << "chain CF needs gamma_j < 1; gamma_" << j << " = " << s.gamma(j);
      throw PreconditionError(os.str());
    }
  }
}

}  // namespace

std::complex<double> pareto_em_chain_cf(double alpha, const StepSchedule& s, double x0,
                                        std::size_t n, double lambda, ParetoCfCache* cache) {
  validate_alpha(alpha);
  check_lambda(lambda);
  check_chain_steps(s, n);
  const double beta = noise_constants(alpha, 1).beta;
  // log P_{j+1} for j = n, n-1, ..., 1
  double log_p = 0.0;
  double log_mag = 0.0;
  int negatives = 0;
  for (std::size_t j = n; j >= 1; --j) {
    const double g = s.gamma(j);
    const double arg = std::exp(std::log(g) / alpha + log_p) * lambda / beta;
    const double phi = cache ? cache->get(alpha, arg) : pareto_cf(alpha, arg);
    if (phi == 0.0) return {0.0, 0.0};
    if (phi < 0.0) ++negatives;
    log_mag += std::log(std::abs(phi));
    log_p += std::log1p(-g);
  }
  const double mag = (negatives % 2 ? -1.0 : 1.0) * std::exp(log_mag);
  const double phase = lambda * x0 * std::exp(log_p);
  return std::polar(1.0, phase) * mag;
}

std::complex<double> pareto_em_chain_cf_linear(double alpha, const StepSchedule& s, double x0,
                                               std::size_t n, double lambda) {
  validate_alpha(alpha);
  check_lambda(lambda);
  check_chain_steps(s, n);
  const double beta = noise_constants(alpha, 1).beta;
  double p = 1.0;
  double prod = 1.0;
  for (std::size_t j = n; j >= 1; --j) {
    const double g = s.gamma(j);
    prod *= pareto_cf(alpha, std::pow(g, 1.0 / alpha) * p * lambda / beta);
    p *= 1.0 - g;
  }
  return std::polar(1.0, lambda * x0 * p) * prod;
}

CfGrid pareto_em_chain_cf_grid(double alpha, const StepSchedule& s, double x0, std::size_t n,
                               const std::vector<double>& lambdas, ParetoCfCache* cache) {
  CfGrid g;
  g.lambdas = lambdas;
  g.values.reserve(lambdas.size());
  for (double l : lambdas) g.values.push_back(pareto_em_chain_cf(alpha, s, x0, n, l, cache));
  return g;
}

std::complex<double> stable_em_chain_cf(double alpha, const StepSchedule& s, double x0,
                                        std::size_t n, double lambda) {
  validate_alpha(alpha);
  check_lambda(lambda);
  detail::require(n <= s.max_index(), "n exceeds the schedule length");
  double log_p = 0.0;  // log |P_{j+1}|
  double sum = 0.0;
  double sign = 1.0;
  for (std::size_t j = n; j >= 1; --j) {
    const double g = s.gamma(j);
    sum += g * std::exp(alpha * log_p);
    log_p += std::log(std::abs(1.0 - g));
    if (g > 1.0) sign = -sign;
  }
  const double p1 = n == 0 ? 1.0 : sign * std::exp(log_p);
  return std::polar(std::exp(-sum * std::pow(std::abs(lambda), alpha)), lambda * x0 * p1);
}

std::complex<double> ou_transition_cf(double alpha, double x0, double t, double lambda) {
  validate_alpha(alpha);
  detail::require(t >= 0.0, "time must be nonnegative");
  const double scale_alpha = -std::expm1(-alpha * t) / alpha;
  return std::polar(std::exp(-scale_alpha * std::pow(std::abs(lambda), alpha)),
                    lambda * std::exp(-t) * x0);
}

double stable_ou_invariant_cf(double alpha, double lambda) {
  validate_alpha(alpha);
  return std::exp(-std::pow(std::abs(lambda), alpha) / alpha);
}

}  // namespace levyem
