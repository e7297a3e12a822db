#include "doctest.h"

#include <cmath>
#include <complex>

#include "levyem/cf_oracle.hpp"
#include "levyem/sampling.hpp"

using namespace levyem;

TEST_CASE("Pareto CF: both routes agree where they overlap") {
  for (double a : {1.2, 1.5, 1.8}) {
    CHECK(pareto_cf(a, 0.0) == 1.0);
    for (double l : {0.5, 1.0, 1.5, 2.5, 4.0}) {
      CHECK(std::abs(pareto_cf_series(a, l) - pareto_cf_quadrature(a, l)) < 1e-9);
    }
    CHECK(pareto_cf(a, -3.0) == pareto_cf(a, 3.0));
    // continuity across the switch at |l| = 1
    CHECK(std::abs(pareto_cf(a, std::nextafter(1.0, 2.0)) - pareto_cf(a, 1.0)) < 1e-9);
  }
}

TEST_CASE("Pareto CF against the sampler") {
  const double a = 1.5;
  Stream rng(17);
  const int n = 400000;
  std::vector<double> z(n);
  for (auto& x : z) x = sample_pareto_1d(a, rng);
  for (double l : {0.2, 1.0, 3.0, 20.0}) {
    double re = 0.0;
    for (double x : z) re += std::cos(l * x);
    CHECK(std::abs(re / n - pareto_cf(a, l)) < 4.0 / std::sqrt(n));
  }
}

TEST_CASE("Pareto CF decays at large argument") {
  // |phi(l)| <= alpha / l after one integration by parts
  for (double l : {50.0, 500.0, 5000.0}) CHECK(std::abs(pareto_cf(1.5, l)) <= 1.5 / l);
}

TEST_CASE("small-argument limit gives beta^alpha") {
  for (double a : {1.2, 1.5}) {
    const double l = 1e-3;
    const double ratio = (1.0 - pareto_cf(a, l)) / std::pow(l, a);
    const double ba = std::pow(noise_constants(a, 1).beta, a);
    CHECK(std::abs(ratio - ba) / ba < 0.05);
  }
  // at alpha = 1.8 the correction decays only like l^{0.2}
  const double ba = std::pow(noise_constants(1.8, 1).beta, 1.8);
  double prev = 1.0;
  for (double l : {1e-3, 1e-5, 1e-7}) {
    const double rel = std::abs((1.0 - pareto_cf(1.8, l)) / std::pow(l, 1.8) - ba) / ba;
    CHECK(rel < prev);
    prev = rel;
  }
  CHECK(prev < 0.04);
}

TEST_CASE("chain CF: trivial cases, log/linear agreement, cache") {
  const auto s = StepSchedule::c_over_rho_n(0.5, 1.0, 2.0 / 3.0);
  const double a = 1.5;
  const auto c0 = pareto_em_chain_cf(a, s, 0.7, 0, 1.3);
  CHECK(std::abs(c0 - std::polar(1.0, 1.3 * 0.7)) < 1e-15);
  // one step: exp(i l x0 (1 - g)) phi(g^{1/a} l / beta)
  const double g = s.gamma(1);
  const double beta = noise_constants(a, 1).beta;
  const auto c1 = pareto_em_chain_cf(a, s, 0.7, 1, 1.3);
  CHECK(std::abs(c1 - std::polar(1.0, 1.3 * 0.7 * (1 - g)) * pareto_cf(a, std::pow(g, 1 / a) * 1.3 / beta)) < 1e-14);
  ParetoCfCache cache;
  for (double l : {0.25, 1.0, 2.0}) {
    const auto lg = pareto_em_chain_cf(a, s, 0.5, 300, l, &cache);
    const auto ln = pareto_em_chain_cf_linear(a, s, 0.5, 300, l);
    CHECK(std::abs(lg - ln) < 1e-12);
  }
  CHECK(cache.size() > 0);
  CHECK_THROWS(pareto_em_chain_cf(a, StepSchedule::c_over_rho_n(2.0, 1.0, 0.5), 0, 1, 1.0));
}

TEST_CASE("chain laws approach the invariant law") {
  const auto s = StepSchedule::c_over_rho_n(0.5, 1.0, 2.0 / 3.0);
  const double a = 1.5;
  double prev = 1.0;
  for (std::size_t n : {128u, 1024u, 8192u}) {
    const double gap = std::abs(pareto_em_chain_cf(a, s, 0.0, n, 1.0) - stable_ou_invariant_cf(a, 1.0));
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 0.01);
  CHECK(std::abs(stable_em_chain_cf(a, s, 0.0, 8192, 1.0) - stable_ou_invariant_cf(a, 1.0)) < 0.01);
  CHECK(std::abs(ou_transition_cf(a, 3.0, 50.0, 0.8) - stable_ou_invariant_cf(a, 0.8)) < 1e-15);
  CHECK(std::abs(ou_transition_cf(a, 3.0, 0.0, 0.8) - std::polar(1.0, 2.4)) < 1e-15);
}

TEST_CASE("stable chain CF for one step") {
  const auto s = StepSchedule::explicit_steps({0.25}, 1.0);
  const auto c = stable_em_chain_cf(1.5, s, 2.0, 1, 0.5);
  const auto want = std::polar(std::exp(-0.25 * std::pow(0.5, 1.5)), 0.5 * 2.0 * 0.75);
  CHECK(std::abs(c - want) < 1e-15);
}
