#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "levyem/rng.hpp"

namespace levyem {

// m x d samples, one row per chain.
using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class W1Method { Sorted1D, ExactLP, Sliced };

struct W1Estimate {
  double value = 0.0;
  W1Method method = W1Method::Sorted1D;
  int n_projections = 0;  // Sliced only
  std::optional<double> std_error;  // bootstrap, when computed
};

std::string to_string(W1Method m);

// Exact W1 between two equal-size 1-D empirical measures (monotone coupling).
W1Estimate w1_sorted_1d(std::span<const double> xs, std::span<const double> ys);
// Same on inputs already sorted ascending.
double w1_presorted(std::span<const double> xs, std::span<const double> ys);

// Minimum-cost perfect matching on an n x n cost matrix (row-major), shortest
// augmenting paths with dual potentials. Returns col_of_row.
std::vector<int> solve_assignment(const std::vector<double>& cost, int n);

// Exact W1 between two equal-size empirical measures in R^d, m <= 256.
W1Estimate w1_exact_lp(const SampleMatrix& xs, const SampleMatrix& ys);

// Average over random unit directions of the 1-D W1 of the projections. A lower
// bound on W1, reported as a proxy. n_projections >= 32.
W1Estimate w1_sliced(const SampleMatrix& xs, const SampleMatrix& ys, int n_projections,
                     Stream& rng);

// Bootstrap standard error of w1_sorted_1d. `paired` resamples (x_i, y_i) jointly,
// which is the right model when the two ensembles are coupled chain by chain.
double w1_bootstrap_stderr(std::span<const double> xs, std::span<const double> ys,
                           int resamples, Stream& rng, bool paired);

// (1/m) sum_i exp(i <l, x_i>) for each l (length d).
std::vector<std::complex<double>> ecf(const SampleMatrix& samples,
                                      const std::vector<std::vector<double>>& lambdas);
std::complex<double> ecf_1d(std::span<const double> xs, double lambda);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (gamma, w1) pairs used in the fit
  std::vector<std::string> warnings;
};

// OLS of log w1 on log gamma. Nonpositive w1 values are dropped with a warning;
// fewer than 4 surviving points is an error.
RateFit rate_fit(const std::vector<std::pair<double, double>>& points);

}  // namespace levyem
