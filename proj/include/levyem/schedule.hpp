#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

namespace levyem {

// gamma_k = c / (rho k)
struct CoverRhoN {
  double c;
  double rho;
};
// gamma_k = gamma1 k^{-a}, 0 < a <= 1
struct Polynomial {
  double gamma1;
  double a;
};
// gamma_k = steps[k - 1]
struct ExplicitSteps {
  std::vector<double> steps;
};

using ScheduleFamily = std::variant<CoverRhoN, Polynomial, ExplicitSteps>;

// Decreasing step-size sequence together with the exponent theta of the
// step-sequence regularity condition. Immutable.
class StepSchedule {
 public:
  StepSchedule(ScheduleFamily family, double theta);

  static StepSchedule c_over_rho_n(double c, double rho, double theta);
  static StepSchedule polynomial(double gamma1, double a, double theta);
  static StepSchedule explicit_steps(std::vector<double> steps, double theta);

  const ScheduleFamily& family() const noexcept { return family_; }
  double theta() const noexcept { return theta_; }

  // k >= 1
  double gamma(std::size_t k) const;
  // t_n = gamma_1 + ... + gamma_n (compensated), t_0 = 0
  double time(std::size_t n) const;
  // t_0 .. t_n in one pass
  std::vector<double> times(std::size_t n) const;
  // Largest usable step index (Explicit lists are finite).
  std::size_t max_index() const noexcept;

  // Round-trippable text form used in configs and report metadata.
  std::string describe() const;

 private:
  ScheduleFamily family_;
  double theta_;
};

inline double gamma_at(const StepSchedule& s, std::size_t k) { return s.gamma(k); }
inline double t_at(const StepSchedule& s, std::size_t n) { return s.time(n); }

struct OmegaValue {
  double value;    // may be +inf
  bool estimated;  // true for Explicit schedules (tail-window sup)
};

OmegaValue omega_of(const StepSchedule& s);

struct RhoTheory {
  double value;
  bool underflow;
};

// d^{2 alpha - 4} 2^{-d} exp(-2^d d^{4 - 2 alpha}), evaluated in log space.
RhoTheory rho_theory(double alpha, int d);

struct WindowRatio {
  std::size_t n;
  std::size_t n_star;
  // sum_{i = n*+1}^{n-1} (t_n - t_i)^{-1/alpha} gamma_i^{1+theta} / gamma_n^theta
  double ratio;
};

struct ScheduleDiagnostics {
  double omega;
  bool omega_estimated;
  double rho;
  double theta;
  // 2/(rho - omega) exp((rho - omega) gamma_1 / 2)
  double limsup_bound;
  std::vector<double> v;                   // v_0 .. v_nmax
  std::vector<double> v_over_gamma_theta;  // index n; entry 0 unused (NaN)
  std::vector<double> exp_decay_ratio;     // exp(-rho t_n) / gamma_n^theta; entry 0 unused
  std::vector<WindowRatio> window;         // evaluated at n = 2^k and n_max, where t_n > 1
};

// n* = max{ i : t_n - t_i > 1 }, requires t_n > 1. `times` holds t_0..t_n.
std::size_t n_star(const std::vector<double>& times, std::size_t n);

ScheduleDiagnostics schedule_diagnostics(const StepSchedule& s, double rho, std::size_t n_max,
                                        double alpha);

// Parses "c-over-n:<c>", "c-over-rho-n:<c>,<rho>", "poly:<gamma1>,<a>",
// "explicit:<g1>,<g2>,...".
StepSchedule parse_schedule(const std::string& text, double theta);

}  // namespace levyem
