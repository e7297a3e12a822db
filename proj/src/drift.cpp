#include "levyem/drift.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levyem/error.hpp"

namespace levyem {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

std::string render(std::span<const double> v) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

void random_unit(Stream& rng, std::span<double> u) {
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (double& x : u) {
      x = rng.normal();
      n2 += x * x;
    }
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : u) x *= inv;
}

}  // namespace

std::vector<double> DriftModel::operator()(std::span<const double> x) const {
  std::vector<double> out(x.size());
  eval(x, out);
  return out;
}

void DriftModel::validate_claims() const {
  detail::require(dim >= 1, "drift dimension must be positive");
  detail::require(static_cast<bool>(eval), "drift has no evaluation function");
  detail::require(lipschitz_l > 0.0, "claimed Lipschitz constant L must be positive");
  detail::require(dissip_theta1 > 0.0, "claimed dissipativity constant theta1 must be positive");
  detail::require(dissip_k >= 0.0, "claimed dissipativity offset K must be nonnegative");
  if (hessian_theta2) detail::require(*hessian_theta2 >= 0.0, "claimed theta2 must be nonnegative");
}

DriftModel builtin_ou(int dim) {
  DriftModel m;
  m.name = "ou";
  m.dim = dim;
  m.eval = [](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -x[i];
  };
  m.lipschitz_l = 1.0;
  m.dissip_theta1 = 1.0;
  m.dissip_k = 0.0;
  m.hessian_theta2 = 0.0;
  m.is_ou = true;
  m.validate_claims();
  return m;
}

DriftModel builtin_perturbed_ou(int dim, double eps) {
  detail::require(eps >= 0.0 && eps < 0.5, "perturbed-ou needs 0 <= eps < 1/2");
  if (eps == 0.0) {
    DriftModel m = builtin_ou(dim);
    m.name = "perturbed-ou:0";
    return m;
  }
  DriftModel m;
  std::ostringstream name;
  name << "perturbed-ou:" << eps;
  m.name = name.str();
  m.dim = dim;
  m.eval = [eps](std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -x[i] + eps * std::sin(x[i]);
  };
  m.lipschitz_l = 1.0 + eps;
  m.dissip_theta1 = 1.0 - eps;
  m.dissip_k = 0.0;
  m.hessian_theta2 = eps;
  m.validate_claims();
  return m;
}

DriftModel zero_drift(int dim) {
  detail::require(dim >= 1, "drift dimension must be positive");
  DriftModel m;
  m.name = "zero";
  m.dim = dim;
  m.eval = [](std::span<const double> x, std::span<double> out) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(x.size()), 0.0);
  };
  m.lipschitz_l = 0.0;
  m.hessian_theta2 = 0.0;
  return m;
}

DriftModel drift_from_name(const std::string& name, int dim) {
  detail::require(dim >= 1, "drift dimension must be positive");
  if (name == "ou") return builtin_ou(dim);
  if (name == "zero") return zero_drift(dim);
  const std::string prefix = "perturbed-ou:";
  if (name.rfind(prefix, 0) == 0) {
    const std::string body = name.substr(prefix.size());
    std::size_t used = 0;
    double eps = 0.0;
    try {
      eps = std::stod(body, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != body.size())
      throw PreconditionError("malformed perturbed-ou parameter '" + body + "'");
    return builtin_perturbed_ou(dim, eps);
  }
  throw PreconditionError("unknown drift '" + name + "' (expected ou, perturbed-ou:<eps>, zero)");
}

CertificationReport certify_assumptions(const DriftModel& m, std::size_t n_pairs, double box,
                                        Stream& rng, double fd_eps) {
  detail::require(n_pairs >= 1000, "certification needs at least 1000 pairs");
  detail::require(box > 0.0, "certification box must be positive");
  detail::require(fd_eps > 0.0, "finite-difference step must be positive");
  m.validate_claims();

  const std::size_t d = static_cast<std::size_t>(m.dim);
  const double rel_tol = 1e-9;
  CertificationReport rep;
  rep.min_dissipation_ratio = std::numeric_limits<double>::infinity();

  std::vector<double> x(d), y(d), bx(d), by(d), diff(d), bdiff(d), zero(d, 0.0), b0(d);
  m.eval(zero, b0);
  const double b0_norm = norm(b0);

  auto fail = [&](const std::string& what) {
    rep.passed = false;
    rep.failure = what + " violated at x = " + render(x) + ", y = " + render(y);
    rep.witness_x = x;
    rep.witness_y = y;
  };

  for (std::size_t p = 0; p < n_pairs && rep.passed; ++p) {
    for (std::size_t i = 0; i < d; ++i) x[i] = box * (2.0 * rng.uniform() - 1.0);
    for (std::size_t i = 0; i < d; ++i) y[i] = box * (2.0 * rng.uniform() - 1.0);
    m.eval(x, bx);
    m.eval(y, by);
    for (std::size_t i = 0; i < d; ++i) {
      diff[i] = x[i] - y[i];
      bdiff[i] = bx[i] - by[i];
    }
    ++rep.pairs_checked;
    const double dxy = norm(diff);
    if (dxy == 0.0) continue;
    const double lip = norm(bdiff);
    rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, lip / dxy);
    if (lip > m.lipschitz_l * dxy * (1.0 + rel_tol)) {
      fail("Lipschitz bound |b(x)-b(y)| <= L|x-y|");
      break;
    }
    const double inner = dot(diff, bdiff);
    rep.min_dissipation_ratio =
        std::min(rep.min_dissipation_ratio, -(inner - m.dissip_k) / (dxy * dxy));
    if (inner > -m.dissip_theta1 * dxy * dxy + m.dissip_k + 1e-9) {
      fail("dissipativity <x-y, b(x)-b(y)> <= -theta1|x-y|^2 + K");
      break;
    }
    const double growth = norm(bx) - b0_norm - m.lipschitz_l * norm(x);
    rep.max_linear_growth_excess = std::max(rep.max_linear_growth_excess, growth);
    if (growth > rel_tol * (1.0 + norm(bx))) {
      fail("linear growth |b(x)| <= |b(0)| + L|x|");
      break;
    }
  }

  if (rep.passed && m.hessian_theta2) {
    const double h = fd_eps;
    std::vector<double> u1(d), u2(d), p(d), f_pp(d), f_pm(d), f_mp(d), f_mm(d), f_p(d), f_m(d);
    const std::size_t probes = std::max<std::size_t>(n_pairs / 10, 100);
    for (std::size_t q = 0; q < probes; ++q) {
      for (std::size_t i = 0; i < d; ++i) x[i] = box * (2.0 * rng.uniform() - 1.0);
      y = x;
      random_unit(rng, u1);
      random_unit(rng, u2);
      auto at = [&](double s2, double s1, std::vector<double>& out) {
        for (std::size_t i = 0; i < d; ++i) p[i] = x[i] + s2 * h * u2[i] + s1 * h * u1[i];
        m.eval(p, out);
      };
      at(1, 1, f_pp);
      at(1, -1, f_pm);
      at(-1, 1, f_mp);
      at(-1, -1, f_mm);
      at(0, 1, f_p);
      at(0, -1, f_m);
      double scale = 0.0;
      double h2 = 0.0;
      double h1 = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double second = (f_pp[i] - f_pm[i] - f_mp[i] + f_mm[i]) / (4.0 * h * h);
        const double first = (f_p[i] - f_m[i]) / (2.0 * h);
        h2 += second * second;
        h1 += first * first;
        scale = std::max({scale, std::abs(f_pp[i]), std::abs(f_mm[i])});
      }
      h2 = std::sqrt(h2);
      h1 = std::sqrt(h1);
      ++rep.hessian_probes;
      rep.max_hessian_norm = std::max(rep.max_hessian_norm, h2);
      rep.max_directional_derivative = std::max(rep.max_directional_derivative, h1);
      // rounding in the second difference grows like eps_mach |b| / h^2
      const double tol2 = 1e-6 + 8.0 * 2.2e-16 * scale / (h * h);
      if (h2 > *m.hessian_theta2 + tol2) {
        fail("second directional derivative bound |grad_u2 grad_u1 b| <= theta2");
        break;
      }
      const double tol1 = 1e-6 + 4.0 * 2.2e-16 * scale / h;
      if (h1 > m.lipschitz_l + tol1) {
        fail("first directional derivative bound |grad_u b| <= L");
        break;
      }
    }
  }
  return rep;
}

}  // namespace levyem
