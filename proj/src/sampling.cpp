#include "levyem/sampling.hpp"

#include <cmath>
#include <sstream>

#include "levyem/error.hpp"

namespace levyem {

void validate_alpha(double alpha) {
  if (!(alpha > 1.0 && alpha < 2.0)) {
    std::ostringstream os;
    os << "alpha must lie in the open interval (1, 2), got " << alpha;
    throw PreconditionError(os.str());
  }
}

StableSpec::StableSpec(double alpha, int dim)
    : alpha_(alpha), dim_(dim), a_(Eigen::MatrixXd::Identity(dim > 0 ? dim : 1, dim > 0 ? dim : 1)) {
  validate_alpha(alpha);
  detail::require(dim >= 1, "dimension must be positive");
}

StableSpec::StableSpec(double alpha, Eigen::MatrixXd matrix_a)
    : alpha_(alpha), dim_(static_cast<int>(matrix_a.rows())), a_(std::move(matrix_a)) {
  validate_alpha(alpha);
  detail::require(dim_ >= 1 && a_.rows() == a_.cols(), "matrix A must be square and non-empty");
  const double scale = std::max(1.0, a_.cwiseAbs().maxCoeff());
  detail::require((a_ - a_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
                  "matrix A must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a_, Eigen::EigenvaluesOnly);
  min_gain_ = eig.eigenvalues().minCoeff();
  detail::require(min_gain_ > 0.0, "matrix A must be positive definite");
  identity_ = a_.isIdentity(0.0);
}

void StableSpec::apply_a(std::span<const double> v, std::span<double> out) const {
  if (identity_) {
    for (int i = 0; i < dim_; ++i) out[i] = v[i];
    return;
  }
  for (int i = 0; i < dim_; ++i) {
    double acc = 0.0;
    for (int j = 0; j < dim_; ++j) acc += a_(i, j) * v[j];
    out[i] = acc;
  }
}

NoiseConstants noise_constants(double alpha, int dim) {
  validate_alpha(alpha);
  detail::require(dim >= 1, "dimension must be positive");
  const double d = dim;
  // Gamma arguments here are all positive: d/2, (d+alpha)/2, 1 - alpha/2 in (0, 1/2).
  const double log_sigma = std::log(2.0) + 0.5 * d * std::log(M_PI) - std::lgamma(0.5 * d);
  const double log_dalpha = std::log(alpha) + (alpha - 1.0) * std::log(2.0) -
                            0.5 * d * std::log(M_PI) + std::lgamma(0.5 * (d + alpha)) -
                            std::lgamma(1.0 - 0.5 * alpha);
  NoiseConstants c{};
  c.sigma_dm1 = std::exp(log_sigma);
  c.d_alpha = std::exp(log_dalpha);
  c.beta = std::exp((std::log(alpha) - log_sigma - log_dalpha) / alpha);
  return c;
}

double stable_from_cms(double alpha, double u, double w) noexcept {
  // sin(a u) / cos(u)^{1/a} * (cos(u - a u) / w)^{(1 - a)/a}
  const double log_mag = -std::log(std::cos(u)) / alpha +
                         (1.0 - alpha) / alpha * std::log(std::cos((1.0 - alpha) * u) / w);
  return std::sin(alpha * u) * std::exp(log_mag);
}

double sample_stable_1d(double alpha, Stream& rng) {
  const double u = M_PI * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  return stable_from_cms(alpha, u, w);
}

double sample_positive_stable(double a, Stream& rng) {
  const double u = M_PI * rng.uniform();
  const double w = rng.exponential();
  const double log_s = std::log(std::sin(a * u)) - std::log(std::sin(u)) / a +
                       (1.0 - a) / a * (std::log(std::sin((1.0 - a) * u)) - std::log(w));
  return std::exp(log_s);
}

void sample_stable_vec(const StableSpec& spec, Stream& rng, std::span<double> out) {
  const int d = spec.dim();
  if (d == 1) {
    out[0] = sample_stable_1d(spec.alpha(), rng);
    return;
  }
  const double s = sample_positive_stable(0.5 * spec.alpha(), rng);
  const double scale = std::sqrt(2.0 * s);
  for (int i = 0; i < d; ++i) out[i] = scale * rng.normal();
}

std::vector<double> sample_stable_vec(const StableSpec& spec, Stream& rng) {
  std::vector<double> out(spec.dim());
  sample_stable_vec(spec, rng, out);
  return out;
}

void sample_pareto_vec(double alpha, int dim, Stream& rng, std::span<double> out) {
  if (dim == 1) {
    out[0] = sample_pareto_1d(alpha, rng);
    return;
  }
  const double r = pareto_radius(alpha, rng.uniform());
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      out[i] = rng.normal();
      norm2 += out[i] * out[i];
    }
  } while (norm2 == 0.0);
  const double f = r / std::sqrt(norm2);
  for (int i = 0; i < dim; ++i) out[i] *= f;
}

std::vector<double> sample_pareto_vec(double alpha, int dim, Stream& rng) {
  validate_alpha(alpha);
  detail::require(dim >= 1, "dimension must be positive");
  std::vector<double> out(dim);
  sample_pareto_vec(alpha, dim, rng, out);
  return out;
}

}  // namespace levyem
