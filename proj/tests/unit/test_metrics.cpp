#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "levyem/error.hpp"
#include "levyem/metrics.hpp"
#include "levyem/sampling.hpp"

using namespace levyem;

namespace {

SampleMatrix random_matrix(Stream& rng, int m, int d, bool heavy) {
  SampleMatrix x(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = heavy ? sample_stable_1d(1.5, rng) : rng.normal();
  return x;
}

std::vector<double> col(const SampleMatrix& x) { return {x.data(), x.data() + x.rows()}; }

double brute_force_w1(const SampleMatrix& x, const SampleMatrix& y) {
  const int m = static_cast<int>(x.rows());
  std::vector<int> p(m);
  std::iota(p.begin(), p.end(), 0);
  double best = 1e300;
  do {
    double s = 0;
    for (int i = 0; i < m; ++i) s += (x.row(i) - y.row(p[i])).norm();
    best = std::min(best, s);
  } while (std::next_permutation(p.begin(), p.end()));
  return best / m;
}

}  // namespace

TEST_CASE("assignment solver matches brute force") {
  Stream rng(3);
  for (int rep = 0; rep < 40; ++rep) {
    const int m = 1 + rep % 7;
    const int d = 1 + rep % 3;
    const auto x = random_matrix(rng, m, d, false), y = random_matrix(rng, m, d, false);
    CHECK(w1_exact_lp(x, y).value == doctest::Approx(brute_force_w1(x, y)).epsilon(1e-12));
  }
}

TEST_CASE("sorted 1-D W1 equals the exact assignment value") {
  Stream rng(4);
  for (int rep = 0; rep < 200; ++rep) {
    const int m = 1 + rep % 16;
    const auto x = random_matrix(rng, m, 1, true), y = random_matrix(rng, m, 1, true);
    const double a = w1_sorted_1d(col(x), col(y)).value;
    const double b = w1_exact_lp(x, y).value;
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, a));
  }
}

TEST_CASE("metric axioms") {
  Stream rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const int m = 1 + rep % 12;
    auto x = col(random_matrix(rng, m, 1, true));
    auto y = col(random_matrix(rng, m, 1, true));
    auto z = col(random_matrix(rng, m, 1, true));
    const double xy = w1_sorted_1d(x, y).value;
    CHECK(w1_sorted_1d(x, x).value == 0.0);
    CHECK(w1_sorted_1d(y, x).value == xy);
    CHECK(xy <= w1_sorted_1d(x, z).value + w1_sorted_1d(z, y).value + 1e-12);
    std::vector<double> xs = x, ys = y, xc = x, yc = y;
    for (auto& v : xs) v += 3.25;
    for (auto& v : ys) v += 3.25;
    for (auto& v : xc) v *= -2.5;
    for (auto& v : yc) v *= -2.5;
    CHECK(std::abs(w1_sorted_1d(xs, ys).value - xy) <= 1e-12 * std::max(1.0, xy));
    CHECK(std::abs(w1_sorted_1d(xc, yc).value - 2.5 * xy) <= 1e-12 * std::max(1.0, xy));
  }
  // point masses: W1 = distance
  const std::vector<double> a{1.0}, b{4.5};
  CHECK(w1_sorted_1d(a, b).value == 3.5);
}

TEST_CASE("preconditions") {
  const std::vector<double> a{1.0, 2.0}, b{1.0};
  CHECK_THROWS_AS(w1_sorted_1d(a, b), PreconditionError);
  CHECK_THROWS_AS(w1_sorted_1d(std::vector<double>{}, std::vector<double>{}), PreconditionError);
  Stream rng(1);
  const auto big = random_matrix(rng, 257, 1, false);
  CHECK_THROWS_AS(w1_exact_lp(big, big), PreconditionError);
  CHECK_THROWS_AS(w1_sliced(big, big, 8, rng), PreconditionError);
}

TEST_CASE("sliced W1 is a lower bound and exact in 1-D") {
  Stream rng(6);
  const auto x = random_matrix(rng, 30, 2, false), y = random_matrix(rng, 30, 2, false);
  const auto s = w1_sliced(x, y, 64, rng);
  CHECK(s.method == W1Method::Sliced);
  CHECK(s.n_projections == 64);
  CHECK(s.value <= w1_exact_lp(x, y).value + 1e-12);
  const auto x1 = random_matrix(rng, 30, 1, false), y1 = random_matrix(rng, 30, 1, false);
  CHECK(w1_sliced(x1, y1, 32, rng).value == w1_sorted_1d(col(x1), col(y1)).value);
}

TEST_CASE("bootstrap standard error") {
  Stream rng(8);
  std::vector<double> x(2000), y(2000);
  for (auto& v : x) v = rng.normal();
  CHECK(w1_bootstrap_stderr(x, x, 50, rng, true) == 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + 1.0;
  // a pure shift keeps W1 = 1 under every paired resample
  CHECK(w1_bootstrap_stderr(x, y, 50, rng, true) < 1e-12);
  for (auto& v : y) v = rng.normal() + 0.5;
  const double se = w1_bootstrap_stderr(x, y, 200, rng, false);
  CHECK(se > 0.005);
  CHECK(se < 0.1);
}

TEST_CASE("empirical characteristic function") {
  const std::vector<double> x{0.0, M_PI};
  CHECK(std::abs(ecf_1d(x, 1.0)) < 1e-15);
  CHECK(ecf_1d(x, 0.0) == std::complex<double>(1.0, 0.0));
  SampleMatrix m(2, 2);
  m << 0.0, 0.0, 1.0, 2.0;
  const auto v = ecf(m, {{0.0, 0.0}, {0.5, 0.25}});
  CHECK(v[0] == std::complex<double>(1.0, 0.0));
  CHECK(std::abs(v[1] - 0.5 * (1.0 + std::polar(1.0, 1.0))) < 1e-15);
}

TEST_CASE("rate fit") {
  std::vector<std::pair<double, double>> pts;
  for (int k = 3; k <= 9; ++k) {
    const double g = std::ldexp(1.0, -k);
    pts.emplace_back(g, 2.0 * std::pow(g, 0.75));
  }
  auto f = rate_fit(pts);
  CHECK(f.slope == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  pts.emplace_back(0.5, 0.0);
  f = rate_fit(pts);
  CHECK(f.warnings.size() == 1);
  CHECK(f.points.size() == 7);
  pts.resize(3);
  CHECK_THROWS_AS(rate_fit(pts), PreconditionError);
}
