#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "levyem/schedule.hpp"

namespace levyem {

struct CfGrid {
  std::vector<double> lambdas;
  std::vector<std::complex<double>> values;
};

// phi(l) = alpha int_1^inf cos(l r) r^{-alpha-1} dr, the characteristic function of
// the 1-D Pareto innovation. Throws NumericalError when the quadrature misses 1e-9.
double pareto_cf(double alpha, double lambda);

// The two evaluation routes, exposed for cross-checks. The series is exact for any
// |l| but loses digits to cancellation beyond |l| ~ 4; the quadrature needs |l| > 0.
double pareto_cf_series(double alpha, double lambda);
double pareto_cf_quadrature(double alpha, double lambda);

// Memo table for pareto_cf keyed by (alpha, lambda). Concurrent readers share the
// lock; misses take it exclusively.
class ParetoCfCache {
 public:
  double get(double alpha, double lambda);
  std::size_t size() const;

 private:
  struct Key {
    std::uint64_t a, l;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };
  mutable std::shared_mutex mu_;
  std::unordered_map<Key, double, KeyHash> table_;
};

// E exp(i l Y_n) for the Pareto-innovation EM chain on b(x) = -x, d = 1, A = 1,
// started at x0:
//   exp(i l x0 P_1) prod_{j=1}^n phi(gamma_j^{1/alpha} P_{j+1} l / beta),
//   P_j = prod_{k=j}^n (1 - gamma_k).
// Requires gamma_j < 1 for j <= n. Products are accumulated in log space.
std::complex<double> pareto_em_chain_cf(double alpha, const StepSchedule& s, double x0,
                                        std::size_t n, double lambda,
                                        ParetoCfCache* cache = nullptr);
// Same quantity with the contraction products formed by direct multiplication.
std::complex<double> pareto_em_chain_cf_linear(double alpha, const StepSchedule& s, double x0,
                                               std::size_t n, double lambda);

CfGrid pareto_em_chain_cf_grid(double alpha, const StepSchedule& s, double x0, std::size_t n,
                               const std::vector<double>& lambdas,
                               ParetoCfCache* cache = nullptr);

// Stable-innovation EM chain on b(x) = -x, d = 1:
//   exp(i l x0 P_1 - |l|^alpha sum_j gamma_j |P_{j+1}|^alpha).
std::complex<double> stable_em_chain_cf(double alpha, const StepSchedule& s, double x0,
                                        std::size_t n, double lambda);

// Law of X_t started at x0 for dX = -X dt + dZ:
//   exp(i l e^{-t} x0 - sigma(t)^alpha |l|^alpha), sigma(t)^alpha = (1 - e^{-alpha t}) / alpha.
std::complex<double> ou_transition_cf(double alpha, double x0, double t, double lambda);

// Invariant law of dX = -X dt + dZ: alpha^{-1/alpha} Z_1, CF exp(-|l|^alpha / alpha).
double stable_ou_invariant_cf(double alpha, double lambda);

}  // namespace levyem
