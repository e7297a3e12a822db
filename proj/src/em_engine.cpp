#include "levyem/em_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "levyem/error.hpp"
#include "levyem/stable_law.hpp"

namespace levyem {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::StableEM: return "stable";
    case Scheme::ParetoEM: return "pareto";
    case Scheme::ExactOU: return "exact-ou";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& text) {
  if (text == "stable") return Scheme::StableEM;
  if (text == "pareto") return Scheme::ParetoEM;
  if (text == "exact-ou") return Scheme::ExactOU;
  throw PreconditionError("unknown scheme '" + text + "' (expected stable, pareto, exact-ou)");
}

namespace {

// The single update used by every EM path, so stepping one chain by hand and
// running the engine agree to the last bit.
inline double em_coord(double x, double g, double b, double scale, double noise) {
  return x + g * b + scale * noise;
}

inline double ou_exact_coord(double x, double decay, double sigma, double zeta) {
  return decay * x + sigma * zeta;
}

void check_state(const ChainState& s, int d) {
  detail::require(static_cast<int>(s.x.size()) == d, "chain state dimension mismatch");
}

ChainState em_step(const ChainState& s, const DriftModel& b, const StableSpec& spec,
                   const StepSchedule& sched, double scale_divisor, std::span<const double> noise) {
  const int d = spec.dim();
  check_state(s, d);
  detail::require(b.dim == d, "drift dimension does not match the noise dimension");
  detail::require(static_cast<int>(noise.size()) == d, "innovation dimension mismatch");
  const double g = sched.gamma(s.n + 1);
  const double scale = std::pow(g, 1.0 / spec.alpha()) / scale_divisor;
  std::vector<double> bx(d), az(d);
  b.eval(s.x, bx);
  spec.apply_a(noise, az);
  ChainState out;
  out.x.resize(d);
  for (int i = 0; i < d; ++i) out.x[i] = em_coord(s.x[i], g, bx[i], scale, az[i]);
  out.n = s.n + 1;
  out.t = s.t + g;
  return out;
}

}  // namespace

ChainState step_stable(const ChainState& s, const DriftModel& b, const StableSpec& spec,
                       const StepSchedule& sched, std::span<const double> zeta) {
  return em_step(s, b, spec, sched, 1.0, zeta);
}

ChainState step_stable(const ChainState& s, const DriftModel& b, const StableSpec& spec,
                       const StepSchedule& sched, Stream& rng) {
  const std::vector<double> z = sample_stable_vec(spec, rng);
  return em_step(s, b, spec, sched, 1.0, z);
}

ChainState step_pareto(const ChainState& s, const DriftModel& b, const StableSpec& spec,
                       const StepSchedule& sched, const NoiseConstants& c,
                       std::span<const double> z_tilde) {
  return em_step(s, b, spec, sched, c.beta, z_tilde);
}

ChainState step_pareto(const ChainState& s, const DriftModel& b, const StableSpec& spec,
                       const StepSchedule& sched, const NoiseConstants& c, Stream& rng) {
  const std::vector<double> z = sample_pareto_vec(spec.alpha(), spec.dim(), rng);
  return em_step(s, b, spec, sched, c.beta, z);
}

double exact_ou_scale(double alpha, double gamma) {
  validate_alpha(alpha);
  detail::require(gamma >= 0.0, "step must be nonnegative");
  if (std::isinf(gamma)) return std::pow(1.0 / alpha, 1.0 / alpha);
  return std::pow(-std::expm1(-alpha * gamma) / alpha, 1.0 / alpha);
}

ChainState step_exact_ou(const ChainState& s, double alpha, const StepSchedule& sched,
                         double zeta) {
  if (s.x.size() != 1)
    throw PreconditionError("exact OU transition is only available in dimension 1");
  const double g = sched.gamma(s.n + 1);
  ChainState out;
  out.x = {ou_exact_coord(s.x[0], std::exp(-g), exact_ou_scale(alpha, g), zeta)};
  out.n = s.n + 1;
  out.t = s.t + g;
  return out;
}

ChainState step_exact_ou(const ChainState& s, double alpha, const StepSchedule& sched,
                         Stream& rng) {
  if (s.x.size() != 1)
    throw PreconditionError("exact OU transition is only available in dimension 1");
  return step_exact_ou(s, alpha, sched, sample_stable_1d(alpha, rng));
}

int default_workers() {
  if (const char* env = std::getenv("LEVYEM_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_chains(std::size_t m, int workers,
                     const std::function<void(std::size_t, std::size_t)>& body) {
  if (workers <= 0) workers = default_workers();
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), std::max<std::size_t>(m, 1));
  if (w <= 1) {
    body(0, m);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(w);
  for (std::size_t k = 0; k < w; ++k) {
    const std::size_t begin = m * k / w;
    const std::size_t end = m * (k + 1) / w;
    pool.emplace_back([&, k, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

void validate_checkpoints(const std::vector<std::size_t>& cps) {
  for (std::size_t i = 1; i < cps.size(); ++i)
    detail::require(cps[i] > cps[i - 1], "checkpoints must be strictly increasing");
}

void enforce_abort_budget(std::size_t aborted, std::size_t m) {
  if (static_cast<double>(aborted) > 1e-3 * static_cast<double>(m)) {
    std::ostringstream os;
    os << aborted << " of " << m << " chains reached a non-finite position (budget 0.1%)";
    throw ExperimentError(os.str());
  }
}

}  // namespace

EnsembleResult run_ensemble(const EnsembleRun& cfg, const RunOptions& opt) {
  const int d = cfg.spec.dim();
  const double alpha = cfg.spec.alpha();
  detail::require(cfg.m_chains >= 1, "m_chains must be at least 1");
  validate_checkpoints(cfg.checkpoints);
  detail::require(cfg.x0.empty() || static_cast<int>(cfg.x0.size()) == d,
                  "x0 dimension does not match the noise dimension");
  if (cfg.scheme == Scheme::ExactOU) {
    detail::require(d == 1 && cfg.drift.is_ou && cfg.drift.dim == 1,
                    "the exact OU scheme needs d = 1 and the ou drift");
    detail::require(cfg.spec.a_is_identity(), "the exact OU scheme needs A = 1");
  } else {
    detail::require(static_cast<bool>(cfg.drift.eval), "drift has no evaluation function");
    detail::require(cfg.drift.dim == d, "drift dimension does not match the noise dimension");
  }
  EnsembleResult res;
  if (cfg.checkpoints.empty()) return res;
  const std::size_t n_max = cfg.checkpoints.back();
  detail::require(n_max <= cfg.schedule.max_index(), "checkpoint beyond the schedule length");

  const std::vector<double> t = cfg.schedule.times(n_max);
  std::vector<double> g(n_max + 1, 0.0), scale(n_max + 1, 0.0), decay(n_max + 1, 1.0);
  const double beta = cfg.scheme == Scheme::ParetoEM ? noise_constants(cfg.spec).beta : 1.0;
  for (std::size_t k = 1; k <= n_max; ++k) {
    g[k] = cfg.schedule.gamma(k);
    if (cfg.scheme == Scheme::ExactOU) {
      decay[k] = std::exp(-g[k]);
      scale[k] = exact_ou_scale(alpha, g[k]);
    } else {
      scale[k] = std::pow(g[k], 1.0 / alpha) / beta;
    }
  }

  const std::size_t m = cfg.m_chains;
  for (std::size_t c : cfg.checkpoints) {
    Snapshot s;
    s.n = c;
    s.t = t[c];
    s.gamma_n = g[c];
    s.samples.resize(static_cast<Eigen::Index>(m), d);
    res.snapshots.push_back(std::move(s));
  }
  std::vector<std::size_t> abort_step(m, 0);

  const bool fast_ou = cfg.drift.is_ou;
  const bool plain_a = cfg.spec.a_is_identity();

  auto run_chain = [&](std::size_t i, std::vector<double>& x, std::vector<double>& bx,
                       std::vector<double>& z, std::vector<double>& az) {
    Stream rng = Stream::for_chain(cfg.master_seed, i);
    for (int j = 0; j < d; ++j) x[j] = cfg.x0.empty() ? 0.0 : cfg.x0[j];
    std::size_t ci = 0;
    auto record = [&] {
      for (int j = 0; j < d; ++j) res.snapshots[ci].samples(static_cast<Eigen::Index>(i), j) = x[j];
      ++ci;
    };
    if (cfg.checkpoints[0] == 0) record();
    for (std::size_t k = 1; k <= n_max; ++k) {
      bool finite = true;
      switch (cfg.scheme) {
        case Scheme::ExactOU: {
          x[0] = ou_exact_coord(x[0], decay[k], scale[k], sample_stable_1d(alpha, rng));
          finite = std::isfinite(x[0]);
          break;
        }
        case Scheme::StableEM:
        case Scheme::ParetoEM: {
          if (cfg.scheme == Scheme::StableEM) sample_stable_vec(cfg.spec, rng, z);
          else sample_pareto_vec(alpha, d, rng, z);
          if (fast_ou) {
            for (int j = 0; j < d; ++j) bx[j] = -x[j];
          } else {
            cfg.drift.eval(x, bx);
          }
          const std::vector<double>& noise = plain_a ? z : az;
          if (!plain_a) cfg.spec.apply_a(z, az);
          for (int j = 0; j < d; ++j) {
            x[j] = em_coord(x[j], g[k], bx[j], scale[k], noise[j]);
            finite = finite && std::isfinite(x[j]);
          }
          break;
        }
      }
      if (!finite) {
        abort_step[i] = k;
        for (; ci < cfg.checkpoints.size(); ++ci)
          for (int j = 0; j < d; ++j)
            res.snapshots[ci].samples(static_cast<Eigen::Index>(i), j) =
                std::numeric_limits<double>::quiet_NaN();
        return;
      }
      if (ci < cfg.checkpoints.size() && cfg.checkpoints[ci] == k) record();
    }
  };

  parallel_chains(m, opt.workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> x(d), bx(d), z(d), az(d);
    for (std::size_t i = begin; i < end; ++i) run_chain(i, x, bx, z, az);
  });

  for (std::size_t i = 0; i < m; ++i)
    if (abort_step[i] != 0) res.aborts.push_back({i, abort_step[i]});
  enforce_abort_budget(res.aborts.size(), m);
  return res;
}

MatchedResult run_matched_ou(Scheme scheme, double alpha, const StepSchedule& sched,
                             std::size_t m_chains, double x0,
                             const std::vector<std::size_t>& checkpoints,
                             std::uint64_t master_seed, const RunOptions& opt) {
  validate_alpha(alpha);
  detail::require(m_chains >= 1, "m_chains must be at least 1");
  validate_checkpoints(checkpoints);
  MatchedResult res;
  if (checkpoints.empty()) return res;
  detail::require(checkpoints.front() >= 1, "matched runs need checkpoints n >= 1");
  const std::size_t n_max = checkpoints.back();
  detail::require(n_max <= sched.max_index(), "checkpoint beyond the schedule length");

  const std::vector<double> t = sched.times(n_max);
  const double beta = noise_constants(alpha, 1).beta;
  std::vector<double> g(n_max + 1, 0.0), gs(n_max + 1, 0.0), chain_scale(n_max + 1, 0.0),
      decay(n_max + 1, 1.0), ref_factor(n_max + 1, 0.0);
  double dscale = 0.0;
  for (std::size_t k = 1; k <= n_max; ++k) {
    g[k] = sched.gamma(k);
    gs[k] = std::pow(g[k], 1.0 / alpha);
    switch (scheme) {
      case Scheme::StableEM: chain_scale[k] = gs[k]; break;
      case Scheme::ParetoEM: chain_scale[k] = gs[k] / beta; break;
      case Scheme::ExactOU:
        decay[k] = std::exp(-g[k]);
        chain_scale[k] = exact_ou_scale(alpha, g[k]);
        break;
    }
    dscale = std::pow(std::abs(1.0 - g[k]), alpha) * dscale + g[k];
    ref_factor[k] = std::pow(alpha * dscale, -1.0 / alpha);
  }
  const ParetoStableCoupling* coupling =
      scheme == Scheme::ParetoEM ? &ParetoStableCoupling::shared(alpha) : nullptr;

  const std::size_t m = m_chains;
  for (std::size_t c : checkpoints) {
    MatchedSnapshot s;
    s.n = c;
    s.t = t[c];
    s.gamma_n = g[c];
    s.chain.resize(m);
    s.reference.resize(m);
    res.snapshots.push_back(std::move(s));
  }
  std::vector<std::size_t> abort_step(m, 0);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  parallel_chains(m, opt.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Stream rng = Stream::for_chain(master_seed, i);
      double y = x0;
      double s = 0.0;
      std::size_t ci = 0;
      for (std::size_t k = 1; k <= n_max; ++k) {
        switch (scheme) {
          case Scheme::StableEM: {
            const double z = sample_stable_1d(alpha, rng);
            y = em_coord(y, g[k], -y, chain_scale[k], z);
            s = em_coord(s, g[k], -s, gs[k], z);
            break;
          }
          case Scheme::ParetoEM: {
            const ParetoParts p = draw_pareto_parts(rng);
            const double r = pareto_radius(alpha, p.v);
            y = em_coord(y, g[k], -y, chain_scale[k], p.sign * r);
            s = em_coord(s, g[k], -s, gs[k], coupling->stable_from_radius(p.v, r, p.sign));
            break;
          }
          case Scheme::ExactOU: {
            const double z = sample_stable_1d(alpha, rng);
            y = ou_exact_coord(y, decay[k], chain_scale[k], z);
            s = em_coord(s, g[k], -s, gs[k], z);
            break;
          }
        }
        if (!std::isfinite(y) || !std::isfinite(s)) {
          abort_step[i] = k;
          for (; ci < checkpoints.size(); ++ci) {
            res.snapshots[ci].chain[i] = nan;
            res.snapshots[ci].reference[i] = nan;
          }
          break;
        }
        if (ci < checkpoints.size() && checkpoints[ci] == k) {
          res.snapshots[ci].chain[i] = y;
          res.snapshots[ci].reference[i] = ref_factor[k] * s;
          ++ci;
        }
      }
    }
  });

  for (std::size_t i = 0; i < m; ++i)
    if (abort_step[i] != 0) res.aborts.push_back({i, abort_step[i]});
  enforce_abort_budget(res.aborts.size(), m);
  return res;
}

double empirical_moment(std::span<const double> xs, double kappa, double alpha) {
  validate_alpha(alpha);
  if (!(kappa >= 1.0 && kappa < alpha)) {
    std::ostringstream os;
    os << "moment order kappa = " << kappa << " must satisfy 1 <= kappa < alpha = " << alpha
       << ": the stable law has no finite moment of order alpha or higher";
    throw PreconditionError(os.str());
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (double x : xs) {
    if (!std::isfinite(x)) continue;
    sum += std::pow(std::abs(x), kappa);
    ++count;
  }
  detail::require(count > 0, "no finite samples");
  return sum / static_cast<double>(count);
}

double empirical_moment(const Snapshot& snap, double kappa, double alpha) {
  const auto& s = snap.samples;
  if (s.cols() == 1) return empirical_moment(std::span<const double>(s.data(), s.rows()), kappa, alpha);
  std::vector<double> norms;
  norms.reserve(s.rows());
  for (Eigen::Index i = 0; i < s.rows(); ++i) norms.push_back(s.row(i).norm());
  return empirical_moment(norms, kappa, alpha);
}

void write_snapshot_csv(const Snapshot& snap, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "chain_index";
  for (Eigen::Index j = 0; j < snap.samples.cols(); ++j) out << ",x" << j;
  out << "\r\n";
  char buf[32];
  for (Eigen::Index i = 0; i < snap.samples.rows(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < snap.samples.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", snap.samples(i, j));
      out << ',' << buf;
    }
    out << "\r\n";
  }
}

nlohmann::json snapshot_sidecar(const EnsembleRun& cfg, const Snapshot& snap,
                                std::size_t abort_count) {
  return nlohmann::json{{"scheme", to_string(cfg.scheme)},
                        {"alpha", cfg.spec.alpha()},
                        {"d", cfg.spec.dim()},
                        {"schedule", cfg.schedule.describe()},
                        {"n", snap.n},
                        {"t", snap.t},
                        {"gamma_n", snap.gamma_n},
                        {"seed", cfg.master_seed},
                        {"abort_count", abort_count},
                        {"rng", Stream::kGeneratorName}};
}

}  // namespace levyem
