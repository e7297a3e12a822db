#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "levyem/rng.hpp"

namespace levyem {

// Drift b : R^d -> R^d plus the constants it claims for the Lipschitz,
// dissipativity and second-derivative conditions:
//   |b(x) - b(y)| <= L |x - y|
//   <x - y, b(x) - b(y)> <= -theta1 |x - y|^2 + K
//   |grad_{u2} grad_{u1} b(x)| <= theta2 |u1| |u2|
// eval must be pure and reentrant.
struct DriftModel {
  using EvalFn = std::function<void(std::span<const double> x, std::span<double> out)>;

  std::string name;
  int dim = 1;
  EvalFn eval;
  double lipschitz_l = 0.0;
  double dissip_theta1 = 0.0;
  double dissip_k = 0.0;
  std::optional<double> hessian_theta2;
  // Set for b(x) = -x; lets the engine and the oracles recognise the OU case.
  bool is_ou = false;

  std::vector<double> operator()(std::span<const double> x) const;
  // Throws unless L > 0, theta1 > 0, K >= 0 and theta2 >= 0 when present.
  void validate_claims() const;
};

// b(x) = -x: L = 1, theta1 = 1, K = 0, theta2 = 0.
DriftModel builtin_ou(int dim);
// b(x) = -x + eps sin(x) componentwise, 0 <= eps < 1/2:
// L = 1 + eps, theta1 = 1 - eps, K = 0, theta2 = eps.
DriftModel builtin_perturbed_ou(int dim, double eps);
// b = 0. Not dissipative; used to isolate the innovation in tests and diagnostics.
DriftModel zero_drift(int dim);

// "ou", "perturbed-ou:<eps>", "zero"
DriftModel drift_from_name(const std::string& name, int dim);

struct CertificationReport {
  bool passed = true;
  std::size_t pairs_checked = 0;
  std::size_t hessian_probes = 0;
  // Largest observed ratios; compare with the claims.
  double max_lipschitz_ratio = 0.0;         // |b(x)-b(y)| / |x-y|
  double min_dissipation_ratio = 0.0;       // -(<x-y, b(x)-b(y)> - K) / |x-y|^2
  double max_hessian_norm = 0.0;            // finite-difference second directional derivative
  double max_linear_growth_excess = 0.0;    // |b(x)| - |b(0)| - L|x|, should stay <= 0
  double max_directional_derivative = 0.0;  // |grad_u b(x)| for unit u (only with theta2)
  std::string failure;                      // names the violated inequality
  std::vector<double> witness_x;
  std::vector<double> witness_y;
};

// Draws n_pairs pairs uniformly in [-box, box]^d and checks each claimed inequality.
// fd_eps is the finite-difference step for the second-derivative probe.
CertificationReport certify_assumptions(const DriftModel& m, std::size_t n_pairs, double box,
                                        Stream& rng, double fd_eps = 1e-4);

}  // namespace levyem
