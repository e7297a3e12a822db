#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "levyem/error.hpp"
#include "levyem/sampling.hpp"
#include "levyem/stable_law.hpp"

using namespace levyem;

namespace {

// sup |F_n - F| for a sorted sample and a continuous cdf
template <class Cdf>
double ks_stat(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, std::abs(f - i / n), std::abs((i + 1) / n - f)});
  }
  return d;
}

// 99.9% point of the Kolmogorov distribution
constexpr double kKs999 = 1.95;

}  // namespace

TEST_CASE("alpha outside (1, 2) is rejected") {
  CHECK_THROWS_AS(validate_alpha(1.0), PreconditionError);
  CHECK_THROWS_AS(validate_alpha(2.0), PreconditionError);
  CHECK_THROWS_AS(validate_alpha(std::nan("")), PreconditionError);
  CHECK_NOTHROW(validate_alpha(1.5));
}

TEST_CASE("noise constants: 1-D Levy density and the beta identity") {
  for (double a : {1.2, 1.5, 1.8}) {
    const auto c = noise_constants(a, 1);
    CHECK(c.sigma_dm1 == doctest::Approx(2.0));
    // Levy measure of exp(-|l|^a): Gamma(1+a) sin(pi a / 2) / pi |z|^{-1-a}
    CHECK(c.d_alpha == doctest::Approx(std::tgamma(1 + a) * std::sin(M_PI * a / 2) / M_PI).epsilon(1e-12));
    CHECK(std::pow(c.beta, a) * c.sigma_dm1 * c.d_alpha == doctest::Approx(a).epsilon(1e-12));
  }
  CHECK(noise_constants(1.5, 2).sigma_dm1 == doctest::Approx(2 * M_PI));
  CHECK(noise_constants(1.5, 3).sigma_dm1 == doctest::Approx(4 * M_PI));
}

TEST_CASE("CMS transform at the centre angle is zero and is odd in u") {
  CHECK(stable_from_cms(1.5, 0.0, 0.7) == 0.0);
  CHECK(stable_from_cms(1.5, 0.3, 0.7) == doctest::Approx(-stable_from_cms(1.5, -0.3, 0.7)));
}

TEST_CASE("1-D stable sampler passes a KS test against the distribution function") {
  for (double a : {1.2, 1.5, 1.8}) {
    const SymmetricStableLaw law(a);
    Stream rng = Stream::for_chain(11, static_cast<std::uint64_t>(a * 10));
    const int n = 20000;
    std::vector<double> xs(n);
    for (auto& x : xs) x = sample_stable_1d(a, rng);
    const double d = ks_stat(xs, [&](double x) { return 1.0 - law.upper_tail(x); });
    CHECK(d * std::sqrt(n) < kKs999);
  }
}

TEST_CASE("vector stable sampler: CF along several directions") {
  const StableSpec spec(1.5, 3);
  Stream rng(5);
  const int n = 200000;
  std::vector<std::vector<double>> zs(n);
  for (auto& z : zs) z = sample_stable_vec(spec, rng);
  const std::vector<std::vector<double>> dirs{{1, 0, 0}, {0, 0.6, 0.8}, {0.5, -0.5, 0.7071067811865476}};
  for (const auto& u : dirs) {
    for (double l : {0.5, 1.0, 2.0}) {
      std::complex<double> acc = 0;
      for (const auto& z : zs) acc += std::polar(1.0, l * (u[0] * z[0] + u[1] * z[1] + u[2] * z[2]));
      acc /= n;
      CHECK(std::abs(acc - std::exp(-std::pow(l, 1.5))) < 4.0 / std::sqrt(n));
    }
  }
}

TEST_CASE("positive stable sampler has Laplace transform exp(-s^a)") {
  Stream rng(9);
  const double a = 0.75;
  const int n = 200000;
  std::vector<double> s(n);
  for (auto& x : s) x = sample_positive_stable(a, rng);
  for (double lam : {0.25, 1.0, 4.0}) {
    double acc = 0;
    for (double x : s) acc += std::exp(-lam * x);
    CHECK(std::abs(acc / n - std::exp(-std::pow(lam, a))) < 4.0 / std::sqrt(n));
  }
}

TEST_CASE("Pareto radius follows r^{-alpha} above 1, in 1-D and 3-D") {
  const double a = 1.5;
  Stream rng(21);
  const int n = 20000;
  std::vector<double> r1(n), r3(n);
  int negative = 0;
  for (int i = 0; i < n; ++i) {
    const double z = sample_pareto_1d(a, rng);
    r1[i] = std::abs(z);
    negative += z < 0;
    const auto v = sample_pareto_vec(a, 3, rng);
    r3[i] = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  }
  auto cdf = [&](double r) { return r <= 1.0 ? 0.0 : 1.0 - std::pow(r, -a); };
  CHECK(ks_stat(r1, cdf) * std::sqrt(n) < kKs999);
  CHECK(ks_stat(r3, cdf) * std::sqrt(n) < kKs999);
  CHECK(std::abs(negative - n / 2.0) < 4.0 * std::sqrt(n / 4.0));
  CHECK(*std::min_element(r1.begin(), r1.end()) >= 1.0);
}

TEST_CASE("matrix A is applied and checked") {
  Eigen::MatrixXd a(2, 2);
  a << 2.0, 0.5, 0.5, 1.0;
  const StableSpec spec(1.5, a);
  CHECK_FALSE(spec.a_is_identity());
  std::vector<double> v{1.0, -1.0}, out(2);
  spec.apply_a(v, out);
  CHECK(out[0] == doctest::Approx(1.5));
  CHECK(out[1] == doctest::Approx(-0.5));
  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 0.0, 1.0;
  CHECK_THROWS_AS(StableSpec(1.5, bad), PreconditionError);
}
