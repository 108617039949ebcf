#ifndef LEVYQ_HARNESS_HPP
#define LEVYQ_HARNESS_HPP

/**
 * @file harness.hpp
 * @brief Monte Carlo experiment harness: configs, scenarios, runners, CSVs.
 *
 * A run is fully determined by an ExperimentConfig (which embeds the base
 * seed): rep r of a curve scenario simulates on rng stream r, task (r, k) of
 * a threshold scenario on stream r * |tau_list| + k, so reruns and prefix
 * reuse are reproducible bit for bit and the thread count never changes any
 * output byte (every row is written to a preassigned slot, files are
 * assembled after the join).
 *
 * Scenario kinds:
 *  - curve:        simulate, estimate psi per rep, evaluate the Z-estimator
 *                  phi_hat(alpha; psi_n) over the alpha grid for each sample
 *                  size in n_list (common random numbers: one trajectory per
 *                  rep, shorter n are prefixes of it);
 *  - threshold:    streaming threshold-route runs, one per (rep, tau);
 *  - asymptotics:  no simulation; tabulate the asymptotic constants per xi;
 *  - correlation:  no simulation; tabulate r(alpha, corr_beta) over the grid.
 *
 * Emitted files (per kind): estimates.csv (rep,alpha,phi_true,phi_hat,
 * psi_hat,n), aggregate.csv, asymptotics.csv (+ sigma.csv when the MLE-route
 * covariance exists), threshold.csv, correlation.csv, and manifest.txt.  The
 * manifest echoes the resolved config as plain key=value lines (floats with
 * 17 significant digits) and parses back through ExperimentConfig::
 * from_config, so `run_scenario(from_config(parse(manifest)))` reproduces
 * every CSV byte-identically.  out_dir and threads are deliberately not part
 * of the manifest: neither influences output bytes.
 *
 * The expectation backend selected by `backend` feeds the MLE-route
 * asymptotic report of curve scenarios (exact-mm1: closed-form M/M/1
 * quadrature; plugin: empirical means over the rep-0 trajectory; gpk:
 * transforms only, which downgrades the report to the route-free columns).
 * Formula-only kinds pick exact-mm1 when the model is M/M/1-shaped and gpk
 * otherwise, whatever `backend` says, since there is no sample to plug in.
 */

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "levyq/asymptotics.hpp"
#include "levyq/config.hpp"
#include "levyq/csv.hpp"
#include "levyq/errors.hpp"
#include "levyq/estimate.hpp"
#include "levyq/exponent.hpp"
#include "levyq/simulate.hpp"

namespace levyq {

/** Base seed used by the built-in scenarios unless overridden. */
inline constexpr std::uint64_t kDefaultSeed = 777;

/**
 * Run fn(0), ..., fn(count - 1) on up to `threads` workers.  Work is handed
 * out through an atomic counter; the first exception is captured and
 * rethrown on the caller after all workers joined.  With threads <= 1 the
 * calls run inline.
 */
template <typename Fn>
inline void parallel_for(std::size_t count, std::size_t threads, const Fn& fn) {
  if (count == 0) return;
  threads = std::min(std::max<std::size_t>(threads, 1), count);
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr error;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

enum class BackendChoice { exact_mm1, plugin, gpk };

inline const char* to_string(BackendChoice b) {
  switch (b) {
    case BackendChoice::exact_mm1: return "exact-mm1";
    case BackendChoice::plugin: return "plugin";
    case BackendChoice::gpk: return "gpk";
  }
  return "unknown";
}

inline BackendChoice parse_backend(const std::string& s) {
  if (s == "exact-mm1") return BackendChoice::exact_mm1;
  if (s == "plugin") return BackendChoice::plugin;
  if (s == "gpk") return BackendChoice::gpk;
  throw config_error("unknown backend '" + s +
                     "' (expected exact-mm1, plugin or gpk)");
}

enum class ScenarioKind { curve, threshold, asymptotics, correlation };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::curve: return "curve";
    case ScenarioKind::threshold: return "threshold";
    case ScenarioKind::asymptotics: return "asymptotics";
    case ScenarioKind::correlation: return "correlation";
  }
  return "unknown";
}

inline ScenarioKind parse_kind(const std::string& s) {
  if (s == "curve") return ScenarioKind::curve;
  if (s == "threshold") return ScenarioKind::threshold;
  if (s == "asymptotics") return ScenarioKind::asymptotics;
  if (s == "correlation") return ScenarioKind::correlation;
  throw config_error("unknown kind '" + s +
                     "' (expected curve, threshold, asymptotics or correlation)");
}

inline PsiMethod parse_psi_method(const std::string& s) {
  if (s == "mle") return PsiMethod::mle;
  if (s == "threshold" || s == "threshold_moment")
    return PsiMethod::threshold_moment;
  if (s == "oracle") return PsiMethod::oracle;
  throw config_error("unknown psi_method '" + s +
                     "' (expected mle, threshold or oracle)");
}

namespace detail {

/** The M/M/1 oracle matching the model, when the model has that shape. */
inline std::optional<Mm1Oracle> mm1_oracle_for(const LevyExponentModel& m) {
  if (m.cp_rate > 0.0 && m.cp_shape == 1.0 && m.bm_drift == -1.0 &&
      m.bm_var == 0.0 && m.gamma_shape == 0.0 &&
      m.cp_rate < m.cp_rate_param) {
    Mm1Oracle o;
    o.arrival_rate = m.cp_rate;
    o.service_rate = m.cp_rate_param;
    return o;
  }
  return std::nullopt;
}

inline std::string join17(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt17(v[i]);
  }
  return out;
}

inline std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

/** Short float rendering for file names (tau/xi suffixes). */
inline std::string gfmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

/**
 * Resolved experiment description.  Every run is a pure function of this
 * struct; everything except out_dir and threads is echoed in the manifest.
 */
struct ExperimentConfig {
  /** Built-in scenario name, or "" for a hand-written config. */
  std::string scenario;
  ScenarioKind kind = ScenarioKind::curve;
  /** Defaults to the M/M/1 example (lambda = 0.8, mu = 1). */
  LevyExponentModel model{0.8, 1.0, 1.0, -1.0, 0.0, 0.0, 1.0};
  std::vector<double> xi_list{1.0};
  std::vector<double> alphas = parse_grid("0.1:0.1:5");
  /** Curve route: sample sizes, evaluated as prefixes of one trajectory. */
  std::vector<std::size_t> n_list;
  /** Threshold route: qualifying pairs per run. */
  std::size_t m = 0;
  std::vector<double> tau_list;
  /** Correlation kind: the fixed second argument of r(alpha, corr_beta). */
  double corr_beta = 1.0;
  std::size_t reps = 1;
  std::uint64_t seed = kDefaultSeed;
  PsiMethod psi_method = PsiMethod::mle;
  BackendChoice backend = BackendChoice::exact_mm1;
  std::size_t burn_in = 1000;
  double grid_step = 0.0;
  double v0 = 0.0;
  std::string out_dir = "out";
  std::size_t threads = 1;

  void validate() const {
    model.validate();
    if (!model.is_stable())
      throw config_error("experiment: model must be stable (mean input < 0)");
    if (xi_list.empty()) throw config_error("experiment: xi_list is empty");
    for (double x : xi_list)
      if (!(x > 0.0) || !std::isfinite(x))
        throw config_error("experiment: xi values must be positive and finite");
    if (alphas.empty()) throw config_error("experiment: alpha grid is empty");
    for (double a : alphas)
      if (!(a > 0.0) || !std::isfinite(a))
        throw config_error("experiment: alphas must be positive and finite");
    if (reps == 0) throw config_error("experiment: reps must be >= 1");
    if (threads == 0) throw config_error("experiment: threads must be >= 1");

    const bool simulates =
        kind == ScenarioKind::curve || kind == ScenarioKind::threshold;
    if (simulates && xi_list.size() != 1)
      throw config_error(
          "experiment: simulation scenarios take a single xi (got " +
          std::to_string(xi_list.size()) + ")");
    if (psi_method == PsiMethod::mle && simulates && !model.is_subordinator())
      throw config_error(
          "experiment: the mle psi-method needs subordinator input "
          "(bm_var = 0, bm_drift = -1); use psi_method = threshold");

    switch (kind) {
      case ScenarioKind::curve:
        if (n_list.empty())
          throw config_error("experiment: curve scenarios need n_list");
        for (std::size_t n : n_list)
          if (n < 2)
            throw config_error("experiment: curve sample sizes must be >= 2");
        if (psi_method == PsiMethod::threshold_moment)
          throw config_error(
              "experiment: curve scenarios take psi_method mle or oracle; "
              "use the threshold kind for the threshold route");
        if (psi_method == PsiMethod::mle &&
            backend == BackendChoice::exact_mm1 &&
            !detail::mm1_oracle_for(model))
          throw config_error(
              "experiment: backend exact-mm1 needs an M/M/1-shaped model; "
              "use backend = plugin or gpk");
        break;
      case ScenarioKind::threshold:
        if (m == 0)
          throw config_error("experiment: threshold scenarios need m >= 1");
        if (tau_list.empty())
          throw config_error("experiment: threshold scenarios need tau_list");
        for (double t : tau_list)
          if (!(t >= 0.0) || !std::isfinite(t))
            throw config_error("experiment: tau must be >= 0 and finite");
        break;
      case ScenarioKind::asymptotics:
        break;
      case ScenarioKind::correlation:
        if (!(corr_beta > 0.0) || !std::isfinite(corr_beta))
          throw config_error("experiment: corr_beta must be positive");
        if (xi_list.size() != 1)
          throw config_error("experiment: correlation takes a single xi");
        if (!detail::mm1_oracle_for(model))
          throw config_error(
              "experiment: the correlation table needs the exact expectation "
              "backend, so the model must be M/M/1-shaped");
        break;
    }
  }

  /**
   * Manifest body: fixed-order key=value lines covering everything that
   * determines output bytes, then `files=` listing the emitted basenames.
   */
  std::string manifest_text(const std::vector<std::string>& files) const {
    std::string out;
    auto put = [&](const std::string& key, const std::string& value) {
      out += key;
      out += '=';
      out += value;
      out += '\n';
    };
    put("scenario", scenario.empty() ? "generic" : scenario);
    put("kind", to_string(kind));
    put("cp_rate", fmt17(model.cp_rate));
    put("cp_shape", fmt17(model.cp_shape));
    put("cp_rate_param", fmt17(model.cp_rate_param));
    put("bm_drift", fmt17(model.bm_drift));
    put("bm_var", fmt17(model.bm_var));
    put("gamma_shape", fmt17(model.gamma_shape));
    put("gamma_rate", fmt17(model.gamma_rate));
    put("xi_list", detail::join17(xi_list));
    put("alphas", detail::join17(alphas));
    put("n_list", detail::join_sizes(n_list));
    put("m", std::to_string(m));
    put("tau_list", detail::join17(tau_list));
    put("corr_beta", fmt17(corr_beta));
    put("reps", std::to_string(reps));
    put("seed", std::to_string(seed));
    put("psi_method", to_string(psi_method));
    put("backend", to_string(backend));
    put("burn_in", std::to_string(burn_in));
    put("grid_step", fmt17(grid_step));
    put("v0", fmt17(v0));
    std::vector<std::string> sorted = files;
    std::sort(sorted.begin(), sorted.end());
    std::string joined;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (i) joined += ',';
      joined += sorted[i];
    }
    put("files", joined);
    return out;
  }

  static ExperimentConfig built_in(const std::string& name);
  static ExperimentConfig from_config(const KeyValueConfig& kv);

  static ExperimentConfig from_file(const std::string& path) {
    return from_config(KeyValueConfig::from_file(path));
  }
};

/** Names of the built-in scenarios, in catalogue order. */
inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"fig2", "fig3", "fig4",
                                              "fig5", "fig6", "fig7"};
  return names;
}

inline std::string scenario_description(const std::string& name) {
  if (name == "fig2")
    return "M/M/1 exponent curve from one MLE-route sample of n = 30 probes";
  if (name == "fig3")
    return "curve error versus sample size n in {30,50,100,200} with common "
           "random numbers";
  if (name == "fig4")
    return "asymptotic constants over a log alpha grid for xi in {0.1,1,5} "
           "(no simulation)";
  if (name == "fig5")
    return "asymptotic correlation r(alpha, 1) of the curve estimator "
           "(no simulation)";
  if (name == "fig6")
    return "threshold-route curve for the three-component model at tau = 2, "
           "m = 200 pairs";
  if (name == "fig7")
    return "threshold-route error across tau in {0.5,1,2,5} for the "
           "three-component model";
  throw config_error("unknown scenario '" + name + "' (known: fig2..fig7)");
}

inline ExperimentConfig ExperimentConfig::built_in(const std::string& name) {
  ExperimentConfig cfg;  // defaults: M/M/1, xi = 1, alphas 0.1:0.1:5, mle
  cfg.scenario = name;
  if (name == "fig2") {
    cfg.kind = ScenarioKind::curve;
    cfg.n_list = {30};
  } else if (name == "fig3") {
    cfg.kind = ScenarioKind::curve;
    cfg.n_list = {30, 50, 100, 200};
  } else if (name == "fig4") {
    cfg.kind = ScenarioKind::asymptotics;
    cfg.alphas = parse_grid("log:0.1:50:40");
    cfg.xi_list = {0.1, 1.0, 5.0};
  } else if (name == "fig5") {
    cfg.kind = ScenarioKind::correlation;
    cfg.alphas = parse_grid("log:0.1:50:40");
    cfg.corr_beta = 1.0;
  } else if (name == "fig6" || name == "fig7") {
    cfg.kind = ScenarioKind::threshold;
    cfg.model = LevyExponentModel{0.2, 1.2, 0.5, -1.0, 0.1, 1.0, 5.0};
    cfg.psi_method = PsiMethod::threshold_moment;
    cfg.backend = BackendChoice::gpk;
    cfg.m = 200;
    cfg.tau_list = name == "fig6" ? std::vector<double>{2.0}
                                  : std::vector<double>{0.5, 1.0, 2.0, 5.0};
    cfg.burn_in = 0;
  } else {
    throw config_error("unknown scenario '" + name + "' (known: fig2..fig7)");
  }
  return cfg;
}

inline ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& kv) {
  static const std::vector<std::string> known = {
      "scenario", "kind",       "cp_rate",  "cp_shape", "cp_rate_param",
      "bm_drift", "bm_var",     "gamma_shape", "gamma_rate", "xi",
      "xi_list",  "alphas",     "n",        "n_list",   "m",
      "tau",      "tau_list",   "corr_beta", "reps",    "seed",
      "psi_method", "backend",  "burn_in",  "grid_step", "v0",
      "out_dir",  "threads",    "files"};
  for (const auto& kventry : kv.entries())
    if (std::find(known.begin(), known.end(), kventry.first) == known.end())
      throw config_error("unknown config key: " + kventry.first);

  std::string scen = kv.get_string("scenario", "");
  if (scen == "generic") scen.clear();
  ExperimentConfig cfg = scen.empty() ? ExperimentConfig{} : built_in(scen);
  cfg.scenario = scen;

  cfg.model.cp_rate = kv.get_double("cp_rate", cfg.model.cp_rate);
  cfg.model.cp_shape = kv.get_double("cp_shape", cfg.model.cp_shape);
  cfg.model.cp_rate_param =
      kv.get_double("cp_rate_param", cfg.model.cp_rate_param);
  cfg.model.bm_drift = kv.get_double("bm_drift", cfg.model.bm_drift);
  cfg.model.bm_var = kv.get_double("bm_var", cfg.model.bm_var);
  cfg.model.gamma_shape = kv.get_double("gamma_shape", cfg.model.gamma_shape);
  cfg.model.gamma_rate = kv.get_double("gamma_rate", cfg.model.gamma_rate);

  if (kv.has("xi")) cfg.xi_list = {kv.get_double("xi")};
  if (kv.has("xi_list")) cfg.xi_list = kv.get_double_list("xi_list");
  if (kv.has("alphas")) cfg.alphas = parse_grid(kv.get_string("alphas"));
  if (kv.has("n")) cfg.n_list = {kv.get_size("n", 0)};
  if (kv.has("n_list")) cfg.n_list = kv.get_size_list("n_list", cfg.n_list);
  cfg.m = kv.get_size("m", cfg.m);
  if (kv.has("tau")) cfg.tau_list = {kv.get_double("tau")};
  if (kv.has("tau_list")) cfg.tau_list = kv.get_double_list("tau_list");
  cfg.corr_beta = kv.get_double("corr_beta", cfg.corr_beta);
  cfg.reps = kv.get_size("reps", cfg.reps);
  cfg.seed = kv.get_uint64("seed", cfg.seed);
  if (kv.has("psi_method"))
    cfg.psi_method = parse_psi_method(kv.get_string("psi_method"));
  if (kv.has("backend")) cfg.backend = parse_backend(kv.get_string("backend"));
  cfg.burn_in = kv.get_size("burn_in", cfg.burn_in);
  cfg.grid_step = kv.get_double("grid_step", cfg.grid_step);
  cfg.v0 = kv.get_double("v0", cfg.v0);
  cfg.out_dir = kv.get_string("out_dir", cfg.out_dir);
  cfg.threads = kv.get_size("threads", cfg.threads);

  if (kv.has("kind")) {
    cfg.kind = parse_kind(kv.get_string("kind"));
  } else if (scen.empty()) {
    // Infer the kind for hand-written configs without one.
    if (cfg.m > 0 && !cfg.tau_list.empty())
      cfg.kind = ScenarioKind::threshold;
    else if (!cfg.n_list.empty())
      cfg.kind = ScenarioKind::curve;
    else
      cfg.kind = ScenarioKind::asymptotics;
  }
  return cfg;
}

/** One estimate of phi(alpha) from one rep at one sample size / threshold. */
struct EstimateRow {
  std::size_t rep = 0;
  double alpha = 0.0;
  double phi_true = 0.0;
  double phi_hat = 0.0;
  double psi_hat = 0.0;
  /** Probe transitions that fed the estimate. */
  std::size_t n = 0;
  double tau = 0.0;
  bool has_tau = false;
};

struct ThresholdRow {
  std::size_t rep = 0;
  ThresholdEstimate est;
};

struct ExperimentResult {
  ExperimentConfig config;
  /** reps x |n_list or tau_list| x |alphas| rows, rep-major. */
  std::vector<EstimateRow> rows;
  std::vector<ThresholdRow> threshold_rows;
  /** Emitted basenames (sorted), including manifest.txt. */
  std::vector<std::string> files;
  double wall_time_ms = 0.0;
};

namespace detail {

/** First n transitions of a stored sample (values[0..n] plus companions). */
inline ProbedSample prefix_sample(const ProbedSample& s, std::size_t n) {
  if (n > s.n())
    throw input_error("prefix_sample: prefix longer than the sample");
  ProbedSample out;
  out.xi = s.xi;
  out.event_exact = s.event_exact;
  const auto count = static_cast<std::ptrdiff_t>(n + 1);
  out.values.assign(s.values.begin(), s.values.begin() + count);
  out.idle.assign(s.idle.begin(), s.idle.begin() + count);
  if (s.times)
    out.times.emplace(s.times->begin(), s.times->begin() + count);
  return out;
}

inline std::string estimates_csv(const std::vector<EstimateRow>& rows) {
  std::string out = "rep,alpha,phi_true,phi_hat,psi_hat,n\n";
  for (const EstimateRow& r : rows)
    out += csv_row({std::to_string(r.rep), fmt17(r.alpha), fmt17(r.phi_true),
                    fmt17(r.phi_hat), fmt17(r.psi_hat), std::to_string(r.n)});
  return out;
}

inline std::string threshold_csv(const std::vector<ThresholdRow>& rows) {
  std::string out =
      "rep,tau,m,total_probes,theta_hat,bias_bound,psi_tilde,fallback_used\n";
  for (const ThresholdRow& r : rows)
    out += csv_row({std::to_string(r.rep), fmt17(r.est.tau),
                    std::to_string(r.est.m), std::to_string(r.est.total_probes),
                    fmt17(r.est.theta_hat), fmt17(r.est.bias_bound),
                    fmt17(r.est.psi_tilde), r.est.fallback_used ? "1" : "0"});
  return out;
}

/** Aggregate of one (group, alpha) cell over reps, in rep order. */
struct AggregateCell {
  std::string n_cell;    // empty when not applicable
  std::string tau_cell;  // empty when not applicable
  double alpha = 0.0;
  std::vector<double> phi_hats;
  std::vector<double> errors;
  std::optional<double> var_scale;      // n for n * Var(phi_hat - phi)
  std::optional<double> ci_half_width;  // for coverage, at this group's n
};

inline std::string aggregate_csv(const std::vector<AggregateCell>& cells,
                                 std::size_t reps) {
  std::string out =
      "alpha,n,tau,reps,mean_phi_hat,mean_abs_err,median_abs_err,"
      "var_sqrt_n_err,ci_coverage\n";
  for (const AggregateCell& c : cells) {
    double sum = 0.0, abs_sum = 0.0;
    for (double p : c.phi_hats) sum += p;
    for (double e : c.errors) abs_sum += std::abs(e);
    const double dr = static_cast<double>(reps);
    std::vector<double> abs_sorted;
    abs_sorted.reserve(c.errors.size());
    for (double e : c.errors) abs_sorted.push_back(std::abs(e));
    std::sort(abs_sorted.begin(), abs_sorted.end());
    const std::size_t half = abs_sorted.size() / 2;
    const double median =
        abs_sorted.size() % 2 == 1
            ? abs_sorted[half]
            : 0.5 * (abs_sorted[half - 1] + abs_sorted[half]);

    std::string var_cell;
    if (c.var_scale && reps >= 2) {
      double mean = 0.0;
      for (double e : c.errors) mean += e;
      mean /= dr;
      double ss = 0.0;
      for (double e : c.errors) ss += (e - mean) * (e - mean);
      var_cell = fmt17(*c.var_scale * ss / (dr - 1.0));
    }
    std::string cover_cell;
    if (c.ci_half_width) {
      std::size_t hit = 0;
      for (double e : c.errors)
        if (std::abs(e) <= *c.ci_half_width) ++hit;
      cover_cell = fmt17(static_cast<double>(hit) / dr);
    }
    out += csv_row({fmt17(c.alpha), c.n_cell, c.tau_cell,
                    std::to_string(reps), fmt17(sum / dr), fmt17(abs_sum / dr),
                    fmt17(median), var_cell, cover_cell});
  }
  return out;
}

/** Named output files, assembled in memory and written at the end. */
using OutputFiles = std::vector<std::pair<std::string, std::string>>;

/**
 * Asymptotic report + serialization for one xi.  Full MLE-route constants
 * when requested and the backend can take expectations; otherwise the
 * route-free columns only (and no covariance file).
 */
inline void emit_report(const ExperimentConfig& cfg, double xi,
                        const StationaryExpectationBackend& backend,
                        bool full_route, std::size_t n_for_ci,
                        const std::string& suffix, OutputFiles& outputs,
                        AsymptoticReport* report_out = nullptr) {
  const AsymptoticReport rep = build_asymptotic_report(
      cfg.model, xi, cfg.alphas, backend, std::max<std::size_t>(n_for_ci, 1),
      0.05, full_route);
  outputs.emplace_back("asymptotics" + suffix + ".csv", report_csv(rep));
  if (full_route)
    outputs.emplace_back("sigma" + suffix + ".csv", matrix_csv(rep.covariance));
  if (report_out) *report_out = rep;
}

inline void run_curve(const ExperimentConfig& cfg, ExperimentResult& result,
                      OutputFiles& outputs) {
  const double xi = cfg.xi_list.front();
  std::vector<std::size_t> sizes = cfg.n_list;
  std::sort(sizes.begin(), sizes.end());
  const std::size_t n_max = sizes.back();
  const std::size_t per_rep = sizes.size() * cfg.alphas.size();
  result.rows.assign(cfg.reps * per_rep, EstimateRow{});

  const std::optional<double> rate_bound =
      cfg.model.cp_rate > 0.0 ? std::optional<double>(cfg.model.cp_rate)
                              : std::nullopt;
  const double psi_oracle =
      cfg.psi_method == PsiMethod::oracle ? psi(cfg.model, xi) : 0.0;

  std::vector<double> phi_true(cfg.alphas.size());
  for (std::size_t a = 0; a < cfg.alphas.size(); ++a)
    phi_true[a] = phi(cfg.model, cfg.alphas[a]);

  std::vector<double> rep0_values;  // feeds the plugin backend
  parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
    SimulationConfig sc;
    sc.model = cfg.model;
    sc.xi = xi;
    sc.n_probes = n_max;
    sc.v0 = cfg.v0;
    sc.burn_in = cfg.burn_in;
    sc.grid_step = cfg.grid_step;
    sc.seed = cfg.seed;
    sc.stream_id = r;
    const ProbedSample sample = simulate_probed_workload(sc);
    if (r == 0) rep0_values = sample.values;

    std::size_t slot = r * per_rep;
    for (std::size_t ni = 0; ni < sizes.size(); ++ni) {
      const ProbedSample prefix = prefix_sample(sample, sizes[ni]);
      const double psi_hat = cfg.psi_method == PsiMethod::oracle
                                 ? psi_oracle
                                 : mle_psi(prefix, rate_bound).value;
      for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
        EstimateRow& row = result.rows[slot++];
        row.rep = r;
        row.alpha = cfg.alphas[a];
        row.phi_true = phi_true[a];
        row.phi_hat = z_estimate_phi(prefix, psi_hat, cfg.alphas[a]);
        row.psi_hat = psi_hat;
        row.n = sizes[ni];
      }
    }
  });
  outputs.emplace_back("estimates.csv", estimates_csv(result.rows));

  // Asymptotic report: full MLE-route constants when the route applies.
  const bool full_route = cfg.psi_method == PsiMethod::mle &&
                          cfg.backend != BackendChoice::gpk;
  AsymptoticReport report;
  if (full_route && cfg.backend == BackendChoice::exact_mm1) {
    emit_report(cfg, xi, StationaryExpectationBackend::exact(
                             *mm1_oracle_for(cfg.model)),
                true, n_max, "", outputs, &report);
  } else if (full_route) {
    emit_report(cfg, xi,
                StationaryExpectationBackend::plugin(rep0_values, 500, 0,
                                                     cfg.seed),
                true, n_max, "", outputs, &report);
  } else {
    emit_report(cfg, xi, StationaryExpectationBackend::gpk(cfg.model), false,
                n_max, "", outputs, &report);
  }

  // Aggregate per (n, alpha); coverage against z sqrt(sigma^2_{alpha,xi} / n).
  const double z = normal_quantile(1.0 - report.delta / 2.0);
  std::vector<AggregateCell> cells;
  for (std::size_t ni = 0; ni < sizes.size(); ++ni)
    for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
      AggregateCell cell;
      cell.n_cell = std::to_string(sizes[ni]);
      cell.alpha = cfg.alphas[a];
      cell.var_scale = static_cast<double>(sizes[ni]);
      if (full_route)
        cell.ci_half_width = z * std::sqrt(report.sigma_alpha_xi_sq[a] /
                                           static_cast<double>(sizes[ni]));
      for (std::size_t r = 0; r < cfg.reps; ++r) {
        const EstimateRow& row =
            result.rows[r * per_rep + ni * cfg.alphas.size() + a];
        cell.phi_hats.push_back(row.phi_hat);
        cell.errors.push_back(row.phi_hat - row.phi_true);
      }
      cells.push_back(std::move(cell));
    }
  outputs.emplace_back("aggregate.csv", aggregate_csv(cells, cfg.reps));
}

inline void run_threshold(const ExperimentConfig& cfg, ExperimentResult& result,
                          OutputFiles& outputs) {
  const double xi = cfg.xi_list.front();
  const std::size_t taus = cfg.tau_list.size();
  const std::size_t tasks = cfg.reps * taus;
  result.rows.assign(tasks * cfg.alphas.size(), EstimateRow{});
  result.threshold_rows.assign(tasks, ThresholdRow{});

  const double psi_oracle =
      cfg.psi_method == PsiMethod::oracle ? psi(cfg.model, xi) : 0.0;
  const std::optional<double> rate_bound =
      cfg.model.cp_rate > 0.0 ? std::optional<double>(cfg.model.cp_rate)
                              : std::nullopt;
  std::vector<double> phi_true(cfg.alphas.size());
  for (std::size_t a = 0; a < cfg.alphas.size(); ++a)
    phi_true[a] = phi(cfg.model, cfg.alphas[a]);

  parallel_for(tasks, cfg.threads, [&](std::size_t t) {
    const std::size_t r = t / taus;
    const std::size_t k = t % taus;
    SimulationConfig sc;
    sc.model = cfg.model;
    sc.xi = xi;
    sc.v0 = cfg.v0;
    sc.burn_in = cfg.burn_in;
    sc.grid_step = cfg.grid_step;
    sc.seed = cfg.seed;
    sc.stream_id = t;
    auto [est, consumed] = threshold_theta_streaming(sc, cfg.m, cfg.tau_list[k]);

    double psi_hat = est.psi_tilde;
    if (cfg.psi_method == PsiMethod::oracle)
      psi_hat = psi_oracle;
    else if (cfg.psi_method == PsiMethod::mle)
      psi_hat = mle_psi(consumed, rate_bound).value;

    std::size_t slot = t * cfg.alphas.size();
    for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
      EstimateRow& row = result.rows[slot++];
      row.rep = r;
      row.alpha = cfg.alphas[a];
      row.phi_true = phi_true[a];
      row.phi_hat = z_estimate_phi(consumed, psi_hat, cfg.alphas[a]);
      row.psi_hat = psi_hat;
      row.n = consumed.n();
      row.tau = cfg.tau_list[k];
      row.has_tau = true;
    }
    result.threshold_rows[t] = ThresholdRow{r, est};
  });

  // Per-tau estimate files (the row schema has no tau column); a single tau
  // keeps the plain name.
  for (std::size_t k = 0; k < taus; ++k) {
    std::vector<EstimateRow> slice;
    slice.reserve(cfg.reps * cfg.alphas.size());
    for (std::size_t r = 0; r < cfg.reps; ++r) {
      const std::size_t base = (r * taus + k) * cfg.alphas.size();
      for (std::size_t a = 0; a < cfg.alphas.size(); ++a)
        slice.push_back(result.rows[base + a]);
    }
    const std::string name =
        taus == 1 ? "estimates.csv"
                  : "estimates_tau" + gfmt(cfg.tau_list[k]) + ".csv";
    outputs.emplace_back(name, estimates_csv(slice));
  }
  outputs.emplace_back("threshold.csv", threshold_csv(result.threshold_rows));

  emit_report(cfg, xi, StationaryExpectationBackend::gpk(cfg.model), false,
              cfg.m, "", outputs);

  std::vector<AggregateCell> cells;
  for (std::size_t k = 0; k < taus; ++k)
    for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
      AggregateCell cell;
      cell.tau_cell = fmt17(cfg.tau_list[k]);
      cell.alpha = cfg.alphas[a];
      for (std::size_t r = 0; r < cfg.reps; ++r) {
        const EstimateRow& row =
            result.rows[(r * taus + k) * cfg.alphas.size() + a];
        cell.phi_hats.push_back(row.phi_hat);
        cell.errors.push_back(row.phi_hat - row.phi_true);
      }
      cells.push_back(std::move(cell));
    }
  outputs.emplace_back("aggregate.csv", aggregate_csv(cells, cfg.reps));
}

inline void run_asymptotics(const ExperimentConfig& cfg,
                            ExperimentResult& result, OutputFiles& outputs) {
  (void)result;
  const std::optional<Mm1Oracle> oracle = mm1_oracle_for(cfg.model);
  const bool full = oracle.has_value() && cfg.psi_method == PsiMethod::mle;
  for (double xi : cfg.xi_list) {
    const std::string suffix =
        cfg.xi_list.size() == 1 ? "" : "_xi" + gfmt(xi);
    if (full)
      emit_report(cfg, xi, StationaryExpectationBackend::exact(*oracle), true,
                  1, suffix, outputs);
    else
      emit_report(cfg, xi, StationaryExpectationBackend::gpk(cfg.model), false,
                  1, suffix, outputs);
  }
}

inline void run_correlation(const ExperimentConfig& cfg,
                            ExperimentResult& result, OutputFiles& outputs) {
  (void)result;
  const double xi = cfg.xi_list.front();
  const StationaryExpectationBackend backend =
      StationaryExpectationBackend::exact(*mm1_oracle_for(cfg.model));
  std::string out = "alpha,r\n";
  for (double a : cfg.alphas)
    out += csv_row({fmt17(a),
                    fmt17(correlation(cfg.model, xi, a, cfg.corr_beta,
                                      backend))});
  outputs.emplace_back("correlation.csv", out);
}

}  // namespace detail

/**
 * Run one experiment: simulate/estimate per the config, write the CSVs and
 * the manifest into cfg.out_dir (created if missing, files overwritten), and
 * return the in-memory rows.  Output bytes depend only on the config fields
 * echoed in the manifest — not on out_dir, threads or timing.
 */
inline ExperimentResult run_scenario(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec)
    throw config_error("cannot create output directory '" + cfg.out_dir +
                       "': " + ec.message());

  ExperimentResult result;
  result.config = cfg;
  detail::OutputFiles outputs;
  switch (cfg.kind) {
    case ScenarioKind::curve: detail::run_curve(cfg, result, outputs); break;
    case ScenarioKind::threshold:
      detail::run_threshold(cfg, result, outputs);
      break;
    case ScenarioKind::asymptotics:
      detail::run_asymptotics(cfg, result, outputs);
      break;
    case ScenarioKind::correlation:
      detail::run_correlation(cfg, result, outputs);
      break;
  }

  std::vector<std::string> names;
  names.reserve(outputs.size() + 1);
  for (const auto& kv : outputs) names.push_back(kv.first);
  names.push_back("manifest.txt");
  outputs.emplace_back("manifest.txt", cfg.manifest_text(names));

  for (const auto& [name, content] : outputs) {
    const std::filesystem::path path =
        std::filesystem::path(cfg.out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out)
      throw config_error("cannot write output file: " + path.string());
  }

  std::sort(names.begin(), names.end());
  result.files = std::move(names);
  result.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                t0)
          .count();
  return result;
}

}  // namespace levyq

#endif  // LEVYQ_HARNESS_HPP
