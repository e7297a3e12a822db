#include "levyem/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "levyem/cf_oracle.hpp"
#include "levyem/drift.hpp"
#include "levyem/error.hpp"
#include "levyem/sampling.hpp"
#include "levyem/schedule.hpp"
#include "levyem/stable_law.hpp"

#ifndef LEVYEM_VERSION
#define LEVYEM_VERSION "0.0.0"
#endif

namespace levyem {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream families used by the harness, kept clear of the chain indices.
constexpr std::uint64_t kSaltFloor = 0x4000000000000000ULL;
constexpr std::uint64_t kSaltReference = 0x4100000000000000ULL;
constexpr std::uint64_t kSaltBootstrap = 0x4200000000000000ULL;
constexpr std::uint64_t kSaltSelfReference = 0x4300000000000000ULL;
constexpr std::uint64_t kSaltWeak = 0x4400000000000000ULL;
constexpr std::uint64_t kSaltIncrement = 0x4500000000000000ULL;
constexpr std::uint64_t kSaltSample = 0x4600000000000000ULL;
constexpr std::uint64_t kSaltCertify = 0x4700000000000000ULL;

constexpr std::size_t kChunk = 4096;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

// Fixed-size chunks, one stream each: the sample set and every per-chunk partial
// are independent of the worker count.
void for_chunks(std::size_t m, std::uint64_t key, int workers,
                const std::function<void(std::size_t chunk, std::size_t begin, std::size_t end,
                                         Stream& rng)>& body) {
  const std::size_t chunks = (m + kChunk - 1) / kChunk;
  parallel_chains(chunks, workers, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t c = cb; c < ce; ++c) {
      Stream rng = Stream::for_chain(key, c);
      body(c, c * kChunk, std::min(m, (c + 1) * kChunk), rng);
    }
  });
}

std::vector<double> invariant_sample(double alpha, std::size_t m, std::uint64_t key, int workers) {
  const double scale = std::pow(alpha, -1.0 / alpha);
  std::vector<double> out(m);
  for_chunks(m, key, workers, [&](std::size_t, std::size_t b, std::size_t e, Stream& rng) {
    for (std::size_t i = b; i < e; ++i) out[i] = scale * sample_stable_1d(alpha, rng);
  });
  return out;
}

std::vector<double> finite_only(std::span<const double> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs)
    if (std::isfinite(x)) out.push_back(x);
  return out;
}

std::uint64_t key_for(std::uint64_t seed, std::uint64_t salt) {
  return derive_stream_key(seed, salt);
}

double theta_of(const ExperimentConfig& cfg) {
  return cfg.theta.value_or(1.0 / cfg.alpha.value_or(1.0));
}

nlohmann::json fit_json(const std::optional<RateFit>& f) {
  if (!f) return nullptr;
  return {{"slope", f->slope},
          {"intercept", f->intercept},
          {"r_squared", f->r_squared},
          {"points", f->points.size()},
          {"warnings", f->warnings}};
}

// Least squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    if (j) out += ',';
    out += quote(t.columns[j]);
  }
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) out += fmt(v);
            else if constexpr (std::is_same_v<T, std::int64_t>) out += std::to_string(v);
            else out += quote(v);
          },
          row[j]);
    }
    out += "\r\n";
  }
  return out;
}

nlohmann::json report_json(const Report& r, const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["experiment"] = r.experiment;
  j["passed"] = r.passed;
  j["seed"] = cfg.seed;
  j["version"] = LEVYEM_VERSION;
  j["rng"] = Stream::kGeneratorName;
  nlohmann::json echo = nlohmann::json::object();
  for (const auto& [k, v] : cfg.entries) echo[k] = v;
  j["config"] = echo;
  j["schedule"] = cfg.schedule;
  j["omega"] = nullptr;
  if (cfg.alpha || cfg.theta) {
    try {
      const OmegaValue om = omega_of(parse_schedule(cfg.schedule, theta_of(cfg)));
      j["omega"] = om.value;
      j["omega_estimated"] = om.estimated;
    } catch (const PreconditionError&) {
    }
  }
  j["rho_toy"] = cfg.rho;
  if (cfg.alpha) j["rho_theory"] = rho_theory(*cfg.alpha, cfg.dim).value;
  j["summary"] = r.summary;
  return j;
}

void emit_outputs(const Report& r, const ExperimentConfig& cfg, const std::string& prefix) {
  detail::require(!prefix.empty(), "output prefix is empty");
  {
    std::ofstream f(prefix + ".csv", std::ios::binary);
    if (!f) throw Error("cannot write '" + prefix + ".csv'");
    f << to_csv(r.table);
  }
  std::ofstream f(prefix + ".json", std::ios::binary);
  if (!f) throw Error("cannot write '" + prefix + ".json'");
  f << report_json(r, cfg).dump(2) << '\n';
}

// ---- rate -------------------------------------------------------------------

RateReport run_rate_experiment(const ExperimentConfig& cfg) {
  const double alpha = cfg.alpha.value();
  const Scheme scheme = parse_scheme(cfg.scheme);
  const StepSchedule sched = parse_schedule(cfg.schedule, theta_of(cfg));
  const DriftModel drift = drift_from_name(cfg.drift, 1);
  detail::require(cfg.dim == 1, "the rate experiment runs in dimension 1");
  detail::require(scheme != Scheme::ExactOU || drift.is_ou, "the exact-ou scheme needs drift = ou");
  const std::size_t m = resolve_m(cfg);
  const int workers = effective_workers(cfg);
  const RunOptions opt{workers};
  const auto& cps = cfg.checkpoints;
  const std::size_t K = cps.size();

  RateReport r;
  r.scheme = scheme;
  r.alpha = alpha;
  r.kappa = resolve_kappa(cfg);

  std::vector<std::vector<double>> chain(K), ref(K);
  std::vector<double> t(K), gam(K);
  bool paired = false;
  std::optional<double> shared_floor;

  if (drift.is_ou && cfg.estimator == Estimator::Matched) {
    r.estimator = "matched";
    paired = true;
    MatchedResult mr = run_matched_ou(scheme, alpha, sched, m, cfg.x0, cps, cfg.seed, opt);
    r.abort_count = mr.aborts.size();
    for (std::size_t k = 0; k < K; ++k) {
      const auto& s = mr.snapshots[k];
      t[k] = s.t;
      gam[k] = s.gamma_n;
      for (std::size_t i = 0; i < s.chain.size(); ++i) {
        if (std::isfinite(s.chain[i]) && std::isfinite(s.reference[i])) {
          chain[k].push_back(s.chain[i]);
          ref[k].push_back(s.reference[i]);
        }
      }
    }
  } else {
    EnsembleRun run;
    run.scheme = scheme;
    run.spec = StableSpec(alpha, 1);
    run.drift = drift;
    run.schedule = sched;
    run.m_chains = m;
    run.x0 = {cfg.x0};
    run.checkpoints = cps;
    run.master_seed = cfg.seed;
    EnsembleResult er = run_ensemble(run, opt);
    r.abort_count = er.aborts.size();
    for (std::size_t k = 0; k < K; ++k) {
      const auto& s = er.snapshots[k];
      t[k] = s.t;
      gam[k] = s.gamma_n;
      chain[k] = finite_only(std::span<const double>(s.samples.data(), s.samples.rows()));
    }
    if (drift.is_ou) {
      r.estimator = "independent";
      for (std::size_t k = 0; k < K; ++k)
        ref[k] = invariant_sample(alpha, chain[k].size(), key_for(cfg.seed, kSaltReference + k),
                                  workers);
    } else {
      r.estimator = "self-reference";
      const auto steps = static_cast<std::size_t>(std::ceil(cfg.ref_time / cfg.ref_step));
      EnsembleRun rr = run;
      rr.scheme = Scheme::StableEM;
      rr.schedule =
          StepSchedule::explicit_steps(std::vector<double>(steps, cfg.ref_step), theta_of(cfg));
      rr.m_chains = 2 * m;
      rr.checkpoints = {steps};
      rr.master_seed = key_for(cfg.seed, kSaltSelfReference);
      EnsembleResult rres = run_ensemble(rr, opt);
      const auto& s = rres.snapshots[0].samples;
      std::vector<double> a = finite_only(std::span<const double>(s.data(), m));
      std::vector<double> b = finite_only(std::span<const double>(s.data() + m, m));
      const std::size_t n = std::min(a.size(), b.size());
      a.resize(n);
      b.resize(n);
      shared_floor = w1_sorted_1d(a, b).value;
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t nk = std::min(chain[k].size(), a.size());
        chain[k].resize(nk);
        ref[k].assign(a.begin(), a.begin() + nk);
      }
    }
  }

  for (std::size_t k = 0; k < K; ++k) {
    RateRow row;
    row.n = cps[k];
    row.t = t[k];
    row.gamma = gam[k];
    row.w1 = w1_sorted_1d(chain[k], ref[k]).value;
    Stream boot(key_for(cfg.seed, kSaltBootstrap + k));
    row.std_error = w1_bootstrap_stderr(chain[k], ref[k], cfg.bootstrap, boot, paired);
    if (shared_floor) {
      row.floor = *shared_floor;
    } else {
      const std::size_t n = chain[k].size();
      const auto a = invariant_sample(alpha, n, key_for(cfg.seed, kSaltFloor + 2 * k), workers);
      const auto b = invariant_sample(alpha, n, key_for(cfg.seed, kSaltFloor + 2 * k + 1), workers);
      row.floor = w1_sorted_1d(a, b).value;
    }
    // coupled estimates sit far below the independent floor; gate those on their own noise
    row.usable = paired ? row.w1 > 5.0 * row.std_error : row.w1 > 5.0 * row.floor;
    row.moment = r.kappa < alpha ? empirical_moment(chain[k], r.kappa, alpha) : kNaN;
    r.rows.push_back(row);
  }

  std::vector<std::pair<double, double>> pts;
  for (const auto& row : r.rows)
    if (row.usable) pts.emplace_back(row.gamma, row.w1);

  if (scheme == Scheme::ExactOU) {
    r.target = 0.0;
    r.tolerance = 0.0;
    r.one_sided = false;
    if (pts.size() >= 4) r.fit = rate_fit(pts);
    std::size_t checked = 0;
    bool ok = true;
    for (const auto& row : r.rows) {
      if (row.t < 20.0) continue;
      ++checked;
      ok = ok && (paired ? row.w1 <= row.floor + 3.0 * row.std_error
                         : std::abs(row.w1 - row.floor) <= 3.0 * row.std_error);
    }
    r.passed = checked > 0 && ok;
    r.verdict = checked == 0 ? "no checkpoint reaches t_n >= 20"
                : ok         ? "W1 at t_n >= 20 is within 3 stderr of the floor"
                             : "W1 at t_n >= 20 stands out from the floor";
    return r;
  }

  if (pts.size() < 4) {
    std::ostringstream os;
    os << "only " << pts.size() << " of " << K
       << " checkpoints have W1 above the noise gate; raise m (now " << m << ")";
    throw ExperimentError(os.str());
  }
  r.fit = rate_fit(pts);
  const bool pareto = scheme == Scheme::ParetoEM;
  r.target = pareto ? (2.0 - alpha) / alpha : 1.0 / alpha;
  r.tolerance = cfg.tolerance.value_or(pareto ? 0.15 : 0.1);
  r.one_sided = !(pareto && drift.is_ou);
  r.min_r_squared = r.one_sided ? 0.0 : 0.9;
  const double s = r.fit->slope;
  if (r.one_sided) {
    r.passed = s >= r.target - r.tolerance;
  } else {
    r.passed = std::abs(s - r.target) <= r.tolerance && r.fit->r_squared >= r.min_r_squared;
  }
  std::ostringstream os;
  os << "slope " << s << (r.one_sided ? " vs floor " : " vs target ") << r.target
     << (r.one_sided ? " - " : " +/- ") << r.tolerance;
  if (!r.one_sided) os << ", r^2 " << r.fit->r_squared;
  r.verdict = os.str();
  return r;
}

Report to_report(const RateReport& r) {
  Report rep;
  rep.experiment = "rate";
  rep.table.columns = {"n", "t_n", "gamma_n", "w1", "stderr", "floor", "usable", "moment"};
  for (const auto& row : r.rows)
    rep.table.rows.push_back({static_cast<std::int64_t>(row.n), row.t, row.gamma, row.w1,
                              row.std_error, row.floor, static_cast<std::int64_t>(row.usable),
                              row.moment});
  rep.passed = r.passed;
  rep.summary = {{"scheme", to_string(r.scheme)},
                 {"alpha", r.alpha},
                 {"estimator", r.estimator},
                 {"fit", fit_json(r.fit)},
                 {"target", r.target},
                 {"tolerance", r.tolerance},
                 {"one_sided", r.one_sided},
                 {"min_r_squared", r.min_r_squared},
                 {"kappa", r.kappa},
                 {"abort_count", r.abort_count},
                 {"verdict", r.verdict}};
  return rep;
}

// ---- weak error -------------------------------------------------------------

TestFunction parse_test_function(const std::string& s) {
  if (s == "cos") return TestFunction::Cos;
  if (s == "rational") return TestFunction::Rational;
  throw PreconditionError("unknown test function '" + s + "' (expected cos or rational)");
}

double apply_test_function(TestFunction f, double x) {
  return f == TestFunction::Cos ? std::cos(x) : 1.0 / (1.0 + x * x);
}

WeakErrorPoint one_step_weak_error(Scheme scheme, double alpha, double gamma, double x0,
                                   TestFunction f, std::size_t m, std::uint64_t seed,
                                   int workers) {
  validate_alpha(alpha);
  detail::require(gamma > 0.0 && gamma < 1.0, "gamma must lie in (0, 1)");
  detail::require(m >= 2, "weak error needs at least 2 samples");
  const double decay = std::exp(-gamma);
  const double sigma = exact_ou_scale(alpha, gamma);
  const double gs = std::pow(gamma, 1.0 / alpha);
  const double beta = noise_constants(alpha, 1).beta;
  const double x_drift = x0 - gamma * x0;
  const double x_exact = decay * x0;
  const ParetoStableCoupling* coupling =
      scheme == Scheme::ParetoEM ? &ParetoStableCoupling::shared(alpha) : nullptr;
  const std::size_t chunks = (m + kChunk - 1) / kChunk;
  std::vector<double> sum(chunks, 0.0), sum2(chunks, 0.0);
  for_chunks(m, key_for(seed, kSaltWeak), workers,
             [&](std::size_t c, std::size_t b, std::size_t e, Stream& rng) {
               double s1 = 0.0, s2 = 0.0;
               for (std::size_t i = b; i < e; ++i) {
                 double x = 0.0, y = 0.0;
                 switch (scheme) {
                   case Scheme::StableEM: {
                     const double z = sample_stable_1d(alpha, rng);
                     x = x_exact + sigma * z;
                     y = x_drift + gs * z;
                     break;
                   }
                   case Scheme::ParetoEM: {
                     const ParetoParts p = draw_pareto_parts(rng);
                     const double rad = pareto_radius(alpha, p.v);
                     x = x_exact + sigma * coupling->stable_from_radius(p.v, rad, p.sign);
                     y = x_drift + gs / beta * (p.sign * rad);
                     break;
                   }
                   case Scheme::ExactOU: {
                     x = x_exact + sigma * sample_stable_1d(alpha, rng);
                     y = x_exact + sigma * sample_stable_1d(alpha, rng);
                     break;
                   }
                 }
                 const double d = apply_test_function(f, x) - apply_test_function(f, y);
                 s1 += d;
                 s2 += d * d;
               }
               sum[c] = s1;
               sum2[c] = s2;
             });
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    s1 += sum[c];
    s2 += sum2[c];
  }
  const double md = static_cast<double>(m);
  const double mean = s1 / md;
  const double var = std::max(0.0, (s2 - md * mean * mean) / (md - 1.0));
  return {gamma, mean, std::sqrt(var / md)};
}

WeakErrorReport run_weak_error_experiment(const ExperimentConfig& cfg) {
  const double alpha = cfg.alpha.value();
  detail::require(cfg.dim == 1 && drift_from_name(cfg.drift, 1).is_ou,
                  "the weak-error experiment needs d = 1 and drift = ou");
  const TestFunction f = parse_test_function(cfg.test_function);
  const std::size_t m = resolve_m(cfg);
  const int workers = effective_workers(cfg);
  WeakErrorReport r;
  r.alpha = alpha;
  r.test_function = cfg.test_function;
  r.pareto_target = 2.0 / alpha;
  std::vector<std::pair<double, double>> sp, pp;
  for (double g : resolve_gammas(cfg)) {
    WeakErrorRow row{g, one_step_weak_error(Scheme::StableEM, alpha, g, cfg.x0, f, m, cfg.seed, workers),
                     one_step_weak_error(Scheme::ParetoEM, alpha, g, cfg.x0, f, m, cfg.seed, workers)};
    sp.emplace_back(g, std::abs(row.stable.error));
    pp.emplace_back(g, std::abs(row.pareto.error));
    r.rows.push_back(row);
  }
  if (r.rows.size() >= 4) {
    r.stable_fit = rate_fit(sp);
    r.pareto_fit = rate_fit(pp);
    r.pareto_in_band = std::abs(r.pareto_fit->slope - r.pareto_target) <= 0.3;
    r.passed = r.stable_fit->slope >= r.pareto_fit->slope - 0.2;
  }
  return r;
}

Report to_report(const WeakErrorReport& r) {
  Report rep;
  rep.experiment = "weak-error";
  rep.table.columns = {"gamma", "stable_error", "stable_stderr", "pareto_error", "pareto_stderr"};
  for (const auto& row : r.rows)
    rep.table.rows.push_back(
        {row.gamma, row.stable.error, row.stable.std_error, row.pareto.error, row.pareto.std_error});
  rep.passed = r.passed;
  rep.summary = {{"alpha", r.alpha},
                 {"test_function", r.test_function},
                 {"stable_fit", fit_json(r.stable_fit)},
                 {"pareto_fit", fit_json(r.pareto_fit)},
                 {"pareto_target", r.pareto_target},
                 {"pareto_in_band", r.pareto_in_band},
                 {"gate", "stable slope >= pareto slope - 0.2"}};
  return rep;
}

// ---- increment moments ------------------------------------------------------

IncrementScaling increment_moment_scaling(Scheme scheme, double alpha, double kappa, double x0,
                                          const std::vector<double>& gammas, std::size_t m,
                                          std::uint64_t seed, int workers) {
  validate_alpha(alpha);
  detail::require(scheme != Scheme::ExactOU, "increment scaling is for the EM schemes");
  detail::require(kappa > 0.0 && kappa < alpha, "kappa must lie in (0, alpha)");
  detail::require(gammas.size() >= 4, "increment scaling needs at least 4 step sizes");
  const double divisor = scheme == Scheme::ParetoEM ? noise_constants(alpha, 1).beta : 1.0;
  const std::size_t G = gammas.size();
  std::vector<double> scale(G);
  for (std::size_t j = 0; j < G; ++j) scale[j] = std::pow(gammas[j], 1.0 / alpha) / divisor;
  const std::size_t chunks = (m + kChunk - 1) / kChunk;
  std::vector<double> sums(chunks * G, 0.0);
  for_chunks(m, key_for(seed, kSaltIncrement), workers,
             [&](std::size_t c, std::size_t b, std::size_t e, Stream& rng) {
               for (std::size_t i = b; i < e; ++i) {
                 const double z = scheme == Scheme::StableEM ? sample_stable_1d(alpha, rng)
                                                             : sample_pareto_1d(alpha, rng);
                 for (std::size_t j = 0; j < G; ++j) {
                   const double inc = gammas[j] * (-x0) + scale[j] * z;
                   sums[c * G + j] += std::pow(std::abs(inc), kappa);
                 }
               }
             });
  IncrementScaling out;
  out.target = kappa / alpha;
  for (std::size_t j = 0; j < G; ++j) {
    double s = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) s += sums[c * G + j];
    out.points.emplace_back(gammas[j], s / static_cast<double>(m));
  }
  out.fit = rate_fit(out.points);
  return out;
}

// ---- ergodicity -------------------------------------------------------------

ErgodicityReport run_ergodicity_experiment(const ExperimentConfig& cfg) {
  const double alpha = cfg.alpha.value();
  detail::require(cfg.dim == 1 && drift_from_name(cfg.drift, 1).is_ou,
                  "the ergodicity experiment needs d = 1 and drift = ou");
  const StepSchedule sched = parse_schedule(cfg.schedule, theta_of(cfg));
  const std::size_t m = resolve_m(cfg);
  const auto& cps = cfg.checkpoints;
  const std::size_t K = cps.size();
  detail::require(K >= 1, "ergodicity needs at least one checkpoint");
  const std::size_t n_max = cps.back();
  detail::require(n_max <= sched.max_index(), "checkpoint beyond the schedule length");
  const std::vector<double> t = sched.times(n_max);
  std::vector<double> decay(n_max + 1), sigma(n_max + 1);
  for (std::size_t k = 1; k <= n_max; ++k) {
    decay[k] = std::exp(-sched.gamma(k));
    sigma[k] = exact_ou_scale(alpha, sched.gamma(k));
  }
  std::vector<double> xs(m * K), ys(m * K);
  parallel_chains(m, effective_workers(cfg), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      Stream rng = Stream::for_chain(cfg.seed, i);
      double x = cfg.x0, y = cfg.y0;
      std::size_t ci = 0;
      if (cps[0] == 0) {
        xs[i] = x;
        ys[i] = y;
        ci = 1;
      }
      for (std::size_t k = 1; k <= n_max && ci < K; ++k) {
        const double z = sample_stable_1d(alpha, rng);
        x = decay[k] * x + sigma[k] * z;
        y = decay[k] * y + sigma[k] * z;
        if (cps[ci] == k) {
          xs[ci * m + i] = x;
          ys[ci * m + i] = y;
          ++ci;
        }
      }
    }
  });
  ErgodicityReport r;
  const double d0 = std::abs(cfg.x0 - cfg.y0);
  std::vector<double> lt, ld;
  for (std::size_t k = 0; k < K; ++k) {
    ErgodicityRow row;
    row.n = cps[k];
    row.t = t[cps[k]];
    row.exact = d0 * std::exp(-row.t);
    double sum = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double dist = std::abs(xs[k * m + i] - ys[k * m + i]);
      sum += dist;
      row.max_deviation = std::max(row.max_deviation, std::abs(dist - row.exact));
    }
    row.mean_distance = sum / static_cast<double>(m);
    row.w1 = w1_sorted_1d(std::span<const double>(xs.data() + k * m, m),
                          std::span<const double>(ys.data() + k * m, m))
                 .value;
    r.max_mean_error = std::max(r.max_mean_error, std::abs(row.mean_distance - row.exact));
    if (row.mean_distance > 0.0) {
      lt.push_back(row.t);
      ld.push_back(std::log(row.mean_distance));
    }
    r.rows.push_back(row);
  }
  const bool exact_ok = r.max_mean_error <= 1e-12;
  if (d0 == 0.0) {
    r.passed = exact_ok;
  } else if (lt.size() >= 2 && lt.front() != lt.back()) {
    r.decay_rate = -ols_slope(lt, ld);
    r.passed = exact_ok && *r.decay_rate >= 0.95 && *r.decay_rate <= 1.05;
  } else {
    r.passed = false;
  }
  return r;
}

Report to_report(const ErgodicityReport& r) {
  Report rep;
  rep.experiment = "ergodicity";
  rep.table.columns = {"n", "t_n", "mean_distance", "exact", "max_deviation", "w1"};
  for (const auto& row : r.rows)
    rep.table.rows.push_back({static_cast<std::int64_t>(row.n), row.t, row.mean_distance, row.exact,
                              row.max_deviation, row.w1});
  rep.passed = r.passed;
  rep.summary = {{"decay_rate", r.decay_rate ? nlohmann::json(*r.decay_rate) : nlohmann::json()},
                 {"max_mean_error", r.max_mean_error},
                 {"tolerance", 1e-12},
                 {"rate_band", {0.95, 1.05}}};
  return rep;
}

// ---- characteristic-function check -------------------------------------------

CfCheckReport run_cf_check(const ExperimentConfig& cfg) {
  const double alpha = cfg.alpha.value();
  detail::require(cfg.dim == 1 && drift_from_name(cfg.drift, 1).is_ou,
                  "cf-check needs d = 1 and drift = ou");
  CfCheckReport r;
  r.scheme = parse_scheme(cfg.scheme);
  r.n = cfg.n;
  r.m = resolve_m(cfg);
  r.threshold = 4.0 / std::sqrt(static_cast<double>(r.m));
  EnsembleRun run;
  run.scheme = r.scheme;
  run.spec = StableSpec(alpha, 1);
  run.drift = builtin_ou(1);
  run.schedule = parse_schedule(cfg.schedule, theta_of(cfg));
  run.m_chains = r.m;
  run.x0 = {cfg.x0};
  run.checkpoints = {cfg.n};
  run.master_seed = cfg.seed;
  const EnsembleResult er = run_ensemble(run, RunOptions{effective_workers(cfg)});
  const auto& snap = er.snapshots[0];
  const std::vector<double> xs =
      finite_only(std::span<const double>(snap.samples.data(), snap.samples.rows()));
  ParetoCfCache cache;
  r.passed = true;
  for (double l : resolve_lambdas(cfg)) {
    CfCheckRow row;
    row.lambda = l;
    switch (r.scheme) {
      case Scheme::ParetoEM:
        row.oracle = pareto_em_chain_cf(alpha, run.schedule, cfg.x0, cfg.n, l, &cache);
        break;
      case Scheme::StableEM:
        row.oracle = stable_em_chain_cf(alpha, run.schedule, cfg.x0, cfg.n, l);
        break;
      case Scheme::ExactOU:
        row.oracle = ou_transition_cf(alpha, cfg.x0, snap.t, l);
        break;
    }
    row.empirical = ecf_1d(xs, l);
    row.abs_diff = std::abs(row.empirical - row.oracle);
    r.passed = r.passed && row.abs_diff <= r.threshold;
    r.rows.push_back(row);
  }
  return r;
}

Report to_report(const CfCheckReport& r) {
  Report rep;
  rep.experiment = "cf-check";
  rep.table.columns = {"lambda", "oracle_re", "oracle_im", "ecf_re", "ecf_im", "abs_diff"};
  for (const auto& row : r.rows)
    rep.table.rows.push_back({row.lambda, row.oracle.real(), row.oracle.imag(),
                              row.empirical.real(), row.empirical.imag(), row.abs_diff});
  rep.passed = r.passed;
  rep.summary = {{"scheme", to_string(r.scheme)},
                 {"n", r.n},
                 {"m", r.m},
                 {"threshold", r.threshold}};
  return rep;
}

// ---- sampler check -----------------------------------------------------------

SampleCheckReport run_sample_check(const ExperimentConfig& cfg) {
  const double alpha = cfg.alpha.value();
  const Scheme scheme = parse_scheme(cfg.scheme);
  detail::require(scheme != Scheme::ExactOU, "sample draws stable or pareto innovations");
  const int d = cfg.dim;
  SampleCheckReport r;
  r.scheme = cfg.scheme;
  r.dim = d;
  r.m = resolve_m(cfg);
  const double md = static_cast<double>(r.m);
  const double thr = 4.0 / std::sqrt(md);
  const std::vector<double> lambdas = resolve_lambdas(cfg);
  const std::vector<double> radii{2.0, 4.0, 8.0};
  const std::size_t L = lambdas.size();
  const std::size_t chunks = (r.m + kChunk - 1) / kChunk;
  // per chunk: L cos sums, L sin sums, 3 survival counts
  const std::size_t width = 2 * L + radii.size();
  std::vector<double> acc(chunks * width, 0.0);
  const StableSpec spec(alpha, d);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  for_chunks(r.m, key_for(cfg.seed, kSaltSample), effective_workers(cfg),
             [&](std::size_t c, std::size_t b, std::size_t e, Stream& rng) {
               std::vector<double> z(d);
               double* a = acc.data() + c * width;
               for (std::size_t i = b; i < e; ++i) {
                 if (scheme == Scheme::StableEM) {
                   if (d == 1) z[0] = sample_stable_1d(alpha, rng);
                   else sample_stable_vec(spec, rng, z);
                 } else {
                   if (d == 1) z[0] = sample_pareto_1d(alpha, rng);
                   else sample_pareto_vec(alpha, d, rng, z);
                 }
                 double proj = 0.0, norm2 = 0.0;
                 for (int j = 0; j < d; ++j) {
                   proj += z[j];
                   norm2 += z[j] * z[j];
                 }
                 proj *= inv_sqrt_d;
                 for (std::size_t l = 0; l < L; ++l) {
                   a[l] += std::cos(lambdas[l] * proj);
                   a[L + l] += std::sin(lambdas[l] * proj);
                 }
                 const double norm = std::sqrt(norm2);
                 for (std::size_t q = 0; q < radii.size(); ++q)
                   if (norm > radii[q]) a[2 * L + q] += 1.0;
               }
             });
  std::vector<double> tot(width, 0.0);
  for (std::size_t c = 0; c < chunks; ++c)
    for (std::size_t w = 0; w < width; ++w) tot[w] += acc[c * width + w];

  auto add = [&](const std::string& q, double arg, double emp, double orc, double threshold) {
    const double diff = std::abs(emp - orc);
    r.rows.push_back({q, arg, emp, orc, diff, threshold, diff <= threshold});
  };
  const bool pareto = scheme == Scheme::ParetoEM;
  if (!pareto || d == 1) {
    for (std::size_t l = 0; l < L; ++l) {
      const std::complex<double> emp(tot[l] / md, tot[L + l] / md);
      const double orc = pareto ? pareto_cf(alpha, lambdas[l])
                                : std::exp(-std::pow(std::abs(lambdas[l]), alpha));
      const double diff = std::abs(emp - orc);
      r.rows.push_back({"cf", lambdas[l], emp.real(), orc, diff, thr, diff <= thr});
    }
  }
  if (pareto) {
    for (std::size_t q = 0; q < radii.size(); ++q)
      add("survival", radii[q], tot[2 * L + q] / md, std::pow(radii[q], -alpha), thr);
    if (d == 1) {
      const double l = 1e-3;
      const double ratio = (1.0 - pareto_cf(alpha, l)) / std::pow(l, alpha);
      const double beta_a = std::pow(noise_constants(alpha, 1).beta, alpha);
      // relative error against a 5% band
      const double rel = std::abs(ratio - beta_a) / beta_a;
      r.rows.push_back({"beta-limit", l, ratio, beta_a, rel, 0.05, rel <= 0.05});
    }
  }
  r.passed = std::all_of(r.rows.begin(), r.rows.end(), [](const auto& x) { return x.ok; });
  return r;
}

Report to_report(const SampleCheckReport& r) {
  Report rep;
  rep.experiment = "sample";
  rep.table.columns = {"quantity", "arg", "empirical", "oracle", "abs_diff", "threshold", "ok"};
  for (const auto& row : r.rows)
    rep.table.rows.push_back({row.quantity, row.arg, row.empirical, row.oracle, row.abs_diff,
                              row.threshold, static_cast<std::int64_t>(row.ok)});
  rep.passed = r.passed;
  rep.summary = {{"scheme", r.scheme}, {"dim", r.dim}, {"m", r.m}};
  return rep;
}

// ---- schedule ----------------------------------------------------------------

ScheduleReport run_schedule_diagnostics(const ExperimentConfig& cfg) {
  const double alpha = cfg.alpha.value();
  const StepSchedule s = parse_schedule(cfg.schedule, theta_of(cfg));
  const std::size_t n_max = std::min(cfg.n_max, s.max_index());
  const ScheduleDiagnostics diag = schedule_diagnostics(s, cfg.rho, n_max, alpha);
  ScheduleReport r;
  r.omega = diag.omega;
  r.omega_estimated = diag.omega_estimated;
  r.limsup_bound = diag.limsup_bound;
  r.v_ratio_at_n_max = diag.v_over_gamma_theta[n_max];
  r.bound_holds = r.v_ratio_at_n_max <= r.limsup_bound;
  if (n_max >= 8) {
    std::vector<double> steps(n_max);
    for (std::size_t k = 1; k <= n_max; ++k) steps[k - 1] = s.gamma(k);
    r.omega_tail_estimate = omega_of(StepSchedule::explicit_steps(std::move(steps), s.theta())).value;
  }
  std::vector<std::size_t> ns;
  for (std::size_t n = 1; n <= n_max; n *= 2) {
    ns.push_back(n);
    if (n > n_max / 2) break;
  }
  for (std::size_t n = 10; n <= n_max; n *= 10) {
    ns.push_back(n);
    if (n > n_max / 10) break;
  }
  ns.push_back(n_max);
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  const std::vector<double> t = s.times(n_max);
  r.table.columns = {"n", "t_n", "gamma_n", "v_n", "v_over_gamma_theta", "exp_decay_ratio",
                     "n_star", "window_ratio"};
  for (std::size_t n : ns) {
    double window = kNaN;
    std::int64_t nstar = -1;
    for (const auto& w : diag.window)
      if (w.n == n) {
        window = w.ratio;
        nstar = static_cast<std::int64_t>(w.n_star);
      }
    r.table.rows.push_back({static_cast<std::int64_t>(n), t[n], s.gamma(n), diag.v[n],
                            diag.v_over_gamma_theta[n], diag.exp_decay_ratio[n], nstar, window});
  }
  r.passed = r.bound_holds;
  return r;
}

Report to_report(const ScheduleReport& r) {
  Report rep;
  rep.experiment = "schedule";
  rep.table = r.table;
  rep.passed = r.passed;
  rep.summary = {{"omega_closed_form", r.omega},
                 {"omega_is_estimate", r.omega_estimated},
                 {"omega_tail_estimate", r.omega_tail_estimate ? nlohmann::json(*r.omega_tail_estimate)
                                                               : nlohmann::json()},
                 {"limsup_bound", r.limsup_bound},
                 {"v_ratio_at_n_max", r.v_ratio_at_n_max},
                 {"bound_holds", r.bound_holds}};
  return rep;
}

// ---- drift certification -----------------------------------------------------

Report run_certify_drift(const ExperimentConfig& cfg) {
  const DriftModel m = drift_from_name(cfg.drift, cfg.dim);
  Stream rng(key_for(cfg.seed, kSaltCertify));
  const CertificationReport c = certify_assumptions(m, cfg.pairs, cfg.box, rng);
  Report rep;
  rep.experiment = "certify-drift";
  rep.table.columns = {"drift",          "dim",           "pairs",         "max_lipschitz_ratio",
                       "claimed_l",      "min_dissipation_ratio", "claimed_theta1",
                       "max_hessian_norm", "claimed_theta2", "max_linear_growth_excess",
                       "max_directional_derivative", "failure"};
  rep.table.rows.push_back({m.name, static_cast<std::int64_t>(m.dim),
                            static_cast<std::int64_t>(c.pairs_checked), c.max_lipschitz_ratio,
                            m.lipschitz_l, c.min_dissipation_ratio, m.dissip_theta1,
                            c.max_hessian_norm, m.hessian_theta2.value_or(kNaN),
                            c.max_linear_growth_excess, c.max_directional_derivative, c.failure});
  rep.passed = c.passed;
  rep.summary = {{"drift", m.name},
                 {"passed", c.passed},
                 {"failure", c.failure},
                 {"witness_x", c.witness_x},
                 {"witness_y", c.witness_y}};
  return rep;
}

Report run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment.value()) {
    case Experiment::Rate: return to_report(run_rate_experiment(cfg));
    case Experiment::WeakError: return to_report(run_weak_error_experiment(cfg));
    case Experiment::Ergodicity: return to_report(run_ergodicity_experiment(cfg));
    case Experiment::CfCheck: return to_report(run_cf_check(cfg));
    case Experiment::ScheduleDiag: return to_report(run_schedule_diagnostics(cfg));
    case Experiment::Sample: return to_report(run_sample_check(cfg));
    case Experiment::CertifyDrift: return run_certify_drift(cfg);
  }
  throw PreconditionError("unknown experiment");
}

}  // namespace levyem
