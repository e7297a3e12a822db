#include "levyem/schedule.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <sstream>

#include "levyem/error.hpp"
#include "levyem/sampling.hpp"

namespace levyem {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string fmt_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::vector<double> parse_numbers(const std::string& body) {
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw PreconditionError("malformed number in schedule: '" + item + "'");
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used != item.size()) throw PreconditionError("malformed number in schedule: '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

StepSchedule::StepSchedule(ScheduleFamily family, double theta)
    : family_(std::move(family)), theta_(theta) {
  detail::require(theta > 0.0 && theta <= 1.0, "theta must lie in (0, 1]");
  std::visit(overloaded{
                 [](const CoverRhoN& f) {
                   detail::require(f.c > 0.0 && f.rho > 0.0, "c-over-rho-n needs c > 0 and rho > 0");
                 },
                 [](const Polynomial& f) {
                   detail::require(f.gamma1 > 0.0, "polynomial schedule needs gamma1 > 0");
                   detail::require(f.a > 0.0 && f.a <= 1.0,
                                   "polynomial exponent a must lie in (0, 1] so the steps sum to infinity");
                 },
                 [](const ExplicitSteps& f) {
                   detail::require(!f.steps.empty(), "explicit schedule is empty");
                   for (std::size_t i = 0; i < f.steps.size(); ++i) {
                     detail::require(f.steps[i] > 0.0 && std::isfinite(f.steps[i]),
                                     "explicit steps must be positive and finite");
                     if (i > 0)
                       detail::require(f.steps[i] <= f.steps[i - 1],
                                       "explicit steps must be nonincreasing (index " +
                                           std::to_string(i + 1) + ")");
                   }
                 },
             },
             family_);
}

StepSchedule StepSchedule::c_over_rho_n(double c, double rho, double theta) {
  return StepSchedule(CoverRhoN{c, rho}, theta);
}
StepSchedule StepSchedule::polynomial(double gamma1, double a, double theta) {
  return StepSchedule(Polynomial{gamma1, a}, theta);
}
StepSchedule StepSchedule::explicit_steps(std::vector<double> steps, double theta) {
  return StepSchedule(ExplicitSteps{std::move(steps)}, theta);
}

double StepSchedule::gamma(std::size_t k) const {
  detail::require(k >= 1, "step index k must be >= 1");
  return std::visit(overloaded{
                        [k](const CoverRhoN& f) { return f.c / (f.rho * static_cast<double>(k)); },
                        [k](const Polynomial& f) {
                          return f.gamma1 * std::pow(static_cast<double>(k), -f.a);
                        },
                        [k](const ExplicitSteps& f) {
                          if (k > f.steps.size())
                            throw PreconditionError("step index " + std::to_string(k) +
                                                    " beyond explicit schedule of length " +
                                                    std::to_string(f.steps.size()));
                          return f.steps[k - 1];
                        },
                    },
                    family_);
}

std::vector<double> StepSchedule::times(std::size_t n) const {
  std::vector<double> t(n + 1, 0.0);
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double y = gamma(k) - comp;
    const double next = sum + y;
    comp = (next - sum) - y;
    sum = next;
    t[k] = sum;
  }
  return t;
}

double StepSchedule::time(std::size_t n) const { return times(n).back(); }

std::size_t StepSchedule::max_index() const noexcept {
  if (const auto* e = std::get_if<ExplicitSteps>(&family_)) return e->steps.size();
  return std::numeric_limits<std::size_t>::max();
}

std::string StepSchedule::describe() const {
  return std::visit(overloaded{
                        [](const CoverRhoN& f) {
                          return "c-over-rho-n:" + fmt_double(f.c) + "," + fmt_double(f.rho);
                        },
                        [](const Polynomial& f) {
                          return "poly:" + fmt_double(f.gamma1) + "," + fmt_double(f.a);
                        },
                        [](const ExplicitSteps& f) {
                          std::string s = "explicit:";
                          for (std::size_t i = 0; i < f.steps.size(); ++i) {
                            if (i) s += ",";
                            s += fmt_double(f.steps[i]);
                          }
                          return s;
                        },
                    },
                    family_);
}

OmegaValue omega_of(const StepSchedule& s) {
  const double theta = s.theta();
  return std::visit(
      overloaded{
          [theta](const CoverRhoN& f) { return OmegaValue{theta * f.rho / f.c, false}; },
          [theta](const Polynomial& f) {
            return OmegaValue{f.a < 1.0 ? 0.0 : theta / f.gamma1, false};
          },
          [theta](const ExplicitSteps& f) {
            const std::size_t n = f.steps.size();
            if (n < 8)
              throw PreconditionError("omega needs at least 8 explicit steps to estimate a limsup");
            double sup = -std::numeric_limits<double>::infinity();
            // ratio at k uses gamma_k and gamma_{k+1}; k ranges over the tail [3n/4, n-1]
            for (std::size_t k = (3 * n) / 4; k + 1 <= n; ++k) {
              if (k == 0) continue;
              const double g0 = f.steps[k - 1];
              const double g1 = f.steps[k];
              sup = std::max(sup, (std::pow(g0, theta) - std::pow(g1, theta)) /
                                      std::pow(g1, 1.0 + theta));
            }
            return OmegaValue{sup, true};
          },
      },
      s.family());
}

RhoTheory rho_theory(double alpha, int d) {
  validate_alpha(alpha);
  detail::require(d >= 1, "dimension must be positive");
  const double dd = d;
  const double log_d = std::log(dd);
  // 2^d d^{4-2alpha} in log space; beyond ~700 the exponential underflows anyway
  const double log_inner = dd * std::log(2.0) + (4.0 - 2.0 * alpha) * log_d;
  if (log_inner > 700.0) return {0.0, true};
  const double log_rho = (2.0 * alpha - 4.0) * log_d - dd * std::log(2.0) - std::exp(log_inner);
  if (log_rho < std::log(DBL_MIN)) return {0.0, true};
  return {std::exp(log_rho), false};
}

std::size_t n_star(const std::vector<double>& t, std::size_t n) {
  detail::require(n < t.size() && t[n] > 1.0, "n* is only defined when t_n > 1");
  // t is increasing: start near t_n - 1, then settle with the exact predicate
  auto holds = [&](std::size_t i) { return t[n] - t[i] > 1.0; };
  std::size_t i = static_cast<std::size_t>(
      std::lower_bound(t.begin(), t.begin() + n + 1, t[n] - 1.0) - t.begin());
  if (i > n) i = n;
  while (i + 1 <= n && holds(i + 1)) ++i;
  while (i > 0 && !holds(i)) --i;
  return i;
}

ScheduleDiagnostics schedule_diagnostics(const StepSchedule& s, double rho, std::size_t n_max,
                                        double alpha) {
  validate_alpha(alpha);
  detail::require(n_max >= 1, "n_max must be >= 1");
  detail::require(n_max <= s.max_index(), "n_max exceeds the explicit schedule length");
  const OmegaValue om = omega_of(s);
  if (!(rho > om.value)) {
    std::ostringstream os;
    os << "rho = " << rho << " must exceed omega = " << om.value;
    throw PreconditionError(os.str());
  }
  const double theta = s.theta();
  ScheduleDiagnostics out{};
  out.omega = om.value;
  out.omega_estimated = om.estimated;
  out.rho = rho;
  out.theta = theta;
  out.limsup_bound = 2.0 / (rho - om.value) * std::exp(0.5 * (rho - om.value) * s.gamma(1));

  const std::vector<double> t = s.times(n_max);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.v.assign(n_max + 1, 0.0);
  out.v_over_gamma_theta.assign(n_max + 1, nan);
  out.exp_decay_ratio.assign(n_max + 1, nan);
  std::vector<double> g(n_max + 1, nan);
  for (std::size_t n = 1; n <= n_max; ++n) {
    g[n] = s.gamma(n);
    out.v[n] = std::exp(-rho * g[n]) * out.v[n - 1] + std::pow(g[n], 1.0 + theta);
    const double gt = std::pow(g[n], theta);
    out.v_over_gamma_theta[n] = out.v[n] / gt;
    out.exp_decay_ratio[n] = std::exp(-rho * t[n]) / gt;
  }

  auto window_at = [&](std::size_t n) {
    const std::size_t ns = n_star(t, n);
    double sum = 0.0;
    for (std::size_t i = ns + 1; i < n; ++i) {
      sum += std::pow(t[n] - t[i], -1.0 / alpha) * std::pow(g[i], 1.0 + theta);
    }
    return WindowRatio{n, ns, sum / std::pow(g[n], theta)};
  };
  for (std::size_t n = 1; n <= n_max; n *= 2) {
    if (t[n] > 1.0) out.window.push_back(window_at(n));
    if (n > n_max / 2) break;
  }
  if (t[n_max] > 1.0 && (out.window.empty() || out.window.back().n != n_max))
    out.window.push_back(window_at(n_max));
  return out;
}

StepSchedule parse_schedule(const std::string& text, double theta) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw PreconditionError("schedule '" + text + "' lacks a 'family:' prefix");
  const std::string family = text.substr(0, colon);
  const std::vector<double> p = parse_numbers(text.substr(colon + 1));
  auto want = [&](std::size_t count) {
    if (p.size() != count)
      throw PreconditionError("schedule family '" + family + "' takes " + std::to_string(count) +
                              " parameter(s), got " + std::to_string(p.size()));
  };
  if (family == "c-over-n") {
    want(1);
    return StepSchedule::c_over_rho_n(p[0], 1.0, theta);
  }
  if (family == "c-over-rho-n") {
    want(2);
    return StepSchedule::c_over_rho_n(p[0], p[1], theta);
  }
  if (family == "poly") {
    want(2);
    return StepSchedule::polynomial(p[0], p[1], theta);
  }
  if (family == "explicit") return StepSchedule::explicit_steps(p, theta);
  throw PreconditionError("unknown schedule family '" + family + "'");
}

}  // namespace levyem
