#include "levyem/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "levyem/error.hpp"

namespace levyem {

std::string to_string(W1Method m) {
  switch (m) {
    case W1Method::Sorted1D: return "sorted-1d";
    case W1Method::ExactLP: return "exact-lp";
    case W1Method::Sliced: return "sliced";
  }
  return "unknown";
}

double w1_presorted(std::span<const double> xs, std::span<const double> ys) {
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) sum += std::abs(xs[i] - ys[i]);
  return sum / static_cast<double>(xs.size());
}

W1Estimate w1_sorted_1d(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw PreconditionError("w1_sorted_1d needs equal sample counts; subsample upstream");
  detail::require(!xs.empty(), "w1_sorted_1d needs at least one sample");
  std::vector<double> a(xs.begin(), xs.end());
  std::vector<double> b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  W1Estimate e;
  e.value = w1_presorted(a, b);
  e.method = W1Method::Sorted1D;
  return e;
}

std::vector<int> solve_assignment(const std::vector<double>& cost, int n) {
  // 1-based potentials u (rows), v (cols); p[j] = row matched to column j
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[static_cast<std::size_t>(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col_of_row(n, -1);
  for (int j = 1; j <= n; ++j) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

W1Estimate w1_exact_lp(const SampleMatrix& xs, const SampleMatrix& ys) {
  const auto m = xs.rows();
  detail::require(m == ys.rows() && xs.cols() == ys.cols(),
                  "w1_exact_lp needs equal sample counts and dimensions");
  detail::require(m >= 1, "w1_exact_lp needs at least one sample");
  if (m > 256) throw PreconditionError("w1_exact_lp is limited to m <= 256 samples");
  const int n = static_cast<int>(m);
  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cost[static_cast<std::size_t>(i) * n + j] = (xs.row(i) - ys.row(j)).norm();
  const std::vector<int> match = solve_assignment(cost, n);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += cost[static_cast<std::size_t>(i) * n + match[i]];
  W1Estimate e;
  e.value = sum / n;
  e.method = W1Method::ExactLP;
  return e;
}

W1Estimate w1_sliced(const SampleMatrix& xs, const SampleMatrix& ys, int n_projections,
                     Stream& rng) {
  detail::require(xs.rows() == ys.rows() && xs.cols() == ys.cols(),
                  "w1_sliced needs equal sample counts and dimensions");
  detail::require(n_projections >= 32, "w1_sliced needs at least 32 projections");
  const auto d = xs.cols();
  W1Estimate e;
  e.method = W1Method::Sliced;
  e.n_projections = n_projections;
  if (d == 1) {
    e.value = w1_sorted_1d(std::span<const double>(xs.data(), xs.rows()),
                           std::span<const double>(ys.data(), ys.rows()))
                  .value;
    return e;
  }
  Eigen::VectorXd u(d);
  std::vector<double> px(xs.rows()), py(ys.rows());
  double total = 0.0;
  for (int k = 0; k < n_projections; ++k) {
    double n2 = 0.0;
    do {
      for (Eigen::Index i = 0; i < d; ++i) u[i] = rng.normal();
      n2 = u.squaredNorm();
    } while (n2 == 0.0);
    u /= std::sqrt(n2);
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
      px[i] = xs.row(i).dot(u.transpose());
      py[i] = ys.row(i).dot(u.transpose());
    }
    total += w1_sorted_1d(px, py).value;
  }
  e.value = total / n_projections;
  return e;
}

namespace {

// Uniform index in [0, m) by multiply-shift.
__extension__ typedef unsigned __int128 u128;

std::size_t draw_index(Stream& rng, std::size_t m) {
  return static_cast<std::size_t>((static_cast<u128>(rng()) * m) >> 64);
}

std::vector<std::size_t> argsort(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  return idx;
}

// W1 between the multisets {x_i repeated cx_i times} and {y_i repeated cy_i times},
// walking both in sorted order.
double weighted_sorted_w1(std::span<const double> xs, const std::vector<std::size_t>& ox,
                          const std::vector<std::uint32_t>& cx, std::span<const double> ys,
                          const std::vector<std::size_t>& oy,
                          const std::vector<std::uint32_t>& cy, std::size_t total) {
  std::size_t a = 0, b = 0;
  std::uint32_t ra = 0, rb = 0;
  double sum = 0.0;
  std::size_t done = 0;
  while (done < total) {
    while (ra == 0) ra = cx[ox[a++]];
    while (rb == 0) rb = cy[oy[b++]];
    const std::uint32_t take = std::min(ra, rb);
    sum += take * std::abs(xs[ox[a - 1]] - ys[oy[b - 1]]);
    ra -= take;
    rb -= take;
    done += take;
  }
  return sum / static_cast<double>(total);
}

}  // namespace

double w1_bootstrap_stderr(std::span<const double> xs, std::span<const double> ys,
                           int resamples, Stream& rng, bool paired) {
  detail::require(xs.size() == ys.size() && !xs.empty(), "bootstrap needs equal, nonempty samples");
  detail::require(resamples >= 2, "bootstrap needs at least 2 resamples");
  const std::size_t m = xs.size();
  const auto ox = argsort(xs);
  const auto oy = argsort(ys);
  std::vector<std::uint32_t> cx(m), cy(m);
  double mean = 0.0;
  double m2 = 0.0;
  for (int r = 0; r < resamples; ++r) {
    std::fill(cx.begin(), cx.end(), 0u);
    for (std::size_t k = 0; k < m; ++k) ++cx[draw_index(rng, m)];
    if (paired) {
      cy = cx;
    } else {
      std::fill(cy.begin(), cy.end(), 0u);
      for (std::size_t k = 0; k < m; ++k) ++cy[draw_index(rng, m)];
    }
    const double w = weighted_sorted_w1(xs, ox, cx, ys, oy, cy, m);
    const double delta = w - mean;
    mean += delta / (r + 1);
    m2 += delta * (w - mean);
  }
  return std::sqrt(m2 / (resamples - 1));
}

std::complex<double> ecf_1d(std::span<const double> xs, double lambda) {
  detail::require(!xs.empty(), "ecf needs at least one sample");
  if (lambda == 0.0) return {1.0, 0.0};
  double re = 0.0, im = 0.0;
  for (double x : xs) {
    re += std::cos(lambda * x);
    im += std::sin(lambda * x);
  }
  const double m = static_cast<double>(xs.size());
  return {re / m, im / m};
}

std::vector<std::complex<double>> ecf(const SampleMatrix& samples,
                                      const std::vector<std::vector<double>>& lambdas) {
  detail::require(samples.rows() >= 1, "ecf needs at least one sample");
  std::vector<std::complex<double>> out;
  out.reserve(lambdas.size());
  const double m = static_cast<double>(samples.rows());
  for (const auto& l : lambdas) {
    detail::require(static_cast<Eigen::Index>(l.size()) == samples.cols(),
                    "ecf lambda dimension mismatch");
    if (std::all_of(l.begin(), l.end(), [](double v) { return v == 0.0; })) {
      out.emplace_back(1.0, 0.0);
      continue;
    }
    double re = 0.0, im = 0.0;
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
      double dot = 0.0;
      for (Eigen::Index j = 0; j < samples.cols(); ++j) dot += l[j] * samples(i, j);
      re += std::cos(dot);
      im += std::sin(dot);
    }
    out.emplace_back(re / m, im / m);
  }
  return out;
}

RateFit rate_fit(const std::vector<std::pair<double, double>>& points) {
  RateFit fit;
  for (const auto& [g, w] : points) {
    detail::require(g > 0.0 && std::isfinite(g), "rate_fit needs positive step sizes");
    if (!(w > 0.0) || !std::isfinite(w)) {
      std::ostringstream os;
      os << "dropped point gamma = " << g << " with nonpositive W1 = " << w;
      fit.warnings.push_back(os.str());
      continue;
    }
    fit.points.emplace_back(g, w);
  }
  if (fit.points.size() < 4) {
    std::ostringstream os;
    os << "rate_fit needs at least 4 positive points, got " << fit.points.size();
    throw PreconditionError(os.str());
  }
  const double n = static_cast<double>(fit.points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [g, w] : fit.points) {
    sx += std::log(g);
    sy += std::log(w);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [g, w] : fit.points) {
    const double dx = std::log(g) - mx;
    const double dy = std::log(w) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  detail::require(sxx > 0.0, "rate_fit needs at least two distinct step sizes");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [g, w] : fit.points) {
    const double r = std::log(w) - (fit.intercept + fit.slope * std::log(g));
    ss_res += r * r;
  }
  fit.r_squared = (syy > 0.0) ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

}  // namespace levyem
