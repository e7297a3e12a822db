#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "levyem/rng.hpp"

namespace levyem {

// Noise model of the driving process: rotationally invariant alpha-stable
// in dimension `dim`, pushed through the positive definite matrix `A`.
class StableSpec {
 public:
  // A = identity.
  StableSpec(double alpha, int dim);
  StableSpec(double alpha, Eigen::MatrixXd matrix_a);

  double alpha() const noexcept { return alpha_; }
  int dim() const noexcept { return dim_; }
  const Eigen::MatrixXd& matrix_a() const noexcept { return a_; }
  bool a_is_identity() const noexcept { return identity_; }
  // Smallest |A u| over unit u (smallest eigenvalue of the SPD matrix).
  double a_min_gain() const noexcept { return min_gain_; }

  // out = A v
  void apply_a(std::span<const double> v, std::span<double> out) const;

 private:
  double alpha_;
  int dim_;
  Eigen::MatrixXd a_;
  bool identity_ = true;
  double min_gain_ = 1.0;
};

void validate_alpha(double alpha);

struct NoiseConstants {
  double sigma_dm1;  // surface area of the unit sphere in R^d
  double d_alpha;    // Levy density constant: nu(dz) = d_alpha |z|^{-d-alpha} dz
  double beta;       // Pareto innovation rescaling, beta^alpha sigma d_alpha = alpha
};

NoiseConstants noise_constants(double alpha, int dim);
inline NoiseConstants noise_constants(const StableSpec& spec) {
  return noise_constants(spec.alpha(), spec.dim());
}

// Chambers-Mallows-Stuck: symmetric alpha-stable with E exp(i l Z) = exp(-|l|^alpha),
// from an angle u uniform on (-pi/2, pi/2) and w ~ Exp(1).
double stable_from_cms(double alpha, double u, double w) noexcept;
double sample_stable_1d(double alpha, Stream& rng);

// Positive (a)-stable, 0 < a < 1, with Laplace transform exp(-s^a) (Kanter's form
// of the one-sided CMS transform).
double sample_positive_stable(double a, Stream& rng);

// Isotropic alpha-stable vector with characteristic function exp(-|l|^alpha),
// by Gaussian subordination: sqrt(2 S) G. A is not applied.
void sample_stable_vec(const StableSpec& spec, Stream& rng, std::span<double> out);
std::vector<double> sample_stable_vec(const StableSpec& spec, Stream& rng);

// Radial Pareto draw: radius V^{-1/alpha} times a uniform direction on the sphere.
inline double pareto_radius(double alpha, double v) noexcept {
  return std::pow(v, -1.0 / alpha);
}

// The two ingredients of a 1-D Pareto innovation. Exposed so coupled references
// can reuse the same uniform.
struct ParetoParts {
  double v;     // uniform on (0, 1)
  double sign;  // +1 or -1
};
inline ParetoParts draw_pareto_parts(Stream& rng) noexcept {
  const std::uint64_t bits = rng();
  return {Stream::to_open_unit(bits), (bits & 1u) ? -1.0 : 1.0};
}
inline double sample_pareto_1d(double alpha, Stream& rng) noexcept {
  const ParetoParts p = draw_pareto_parts(rng);
  return p.sign * pareto_radius(alpha, p.v);
}

void sample_pareto_vec(double alpha, int dim, Stream& rng, std::span<double> out);
std::vector<double> sample_pareto_vec(double alpha, int dim, Stream& rng);

}  // namespace levyem
