/**
 * levyq command-line interface.
 *
 * Subcommands:
 *   simulate        write a probe-sampled workload trajectory as CSV
 *   estimate        estimate psi(xi) and the exponent curve from a sample CSV
 *   asymptotics     tabulate the asymptotic constants for a model config
 *   experiment      run a Monte Carlo scenario (built-in or from a config)
 *   list-scenarios  catalogue the built-in scenarios
 *
 * Exit codes: 0 success; 2 configuration/usage problems (bad flags, bad
 * config values, invalid models); 3 numeric or data failures (no convergence,
 * singular grids, methods applied out of scope, not enough data).
 */

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "levyq/levyq.hpp"

namespace {

using namespace levyq;

/** Model + simulation settings shared by `simulate` config files. */
struct SimulateSettings {
  LevyExponentModel model{0.8, 1.0, 1.0, -1.0, 0.0, 0.0, 1.0};
  double xi = 1.0;
  std::size_t n = 0;
  std::size_t burn_in = 1000;
  double v0 = 0.0;
  double grid_step = 0.0;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t stream = 0;
};

SimulateSettings read_simulate_settings(const std::string& path) {
  const KeyValueConfig kv = KeyValueConfig::from_file(path);
  static const std::vector<std::string> known = {
      "cp_rate",     "cp_shape", "cp_rate_param", "bm_drift", "bm_var",
      "gamma_shape", "gamma_rate", "xi",          "n",        "burn_in",
      "v0",          "grid_step", "seed",         "stream"};
  for (const auto& entry : kv.entries())
    if (std::find(known.begin(), known.end(), entry.first) == known.end())
      throw config_error("unknown config key: " + entry.first);

  SimulateSettings s;
  s.model.cp_rate = kv.get_double("cp_rate", s.model.cp_rate);
  s.model.cp_shape = kv.get_double("cp_shape", s.model.cp_shape);
  s.model.cp_rate_param = kv.get_double("cp_rate_param", s.model.cp_rate_param);
  s.model.bm_drift = kv.get_double("bm_drift", s.model.bm_drift);
  s.model.bm_var = kv.get_double("bm_var", s.model.bm_var);
  s.model.gamma_shape = kv.get_double("gamma_shape", s.model.gamma_shape);
  s.model.gamma_rate = kv.get_double("gamma_rate", s.model.gamma_rate);
  s.xi = kv.get_double("xi", s.xi);
  s.n = kv.get_size("n", 0);
  if (s.n == 0) throw config_error("simulate config needs n >= 1");
  s.burn_in = kv.get_size("burn_in", s.burn_in);
  s.v0 = kv.get_double("v0", s.v0);
  s.grid_step = kv.get_double("grid_step", s.grid_step);
  s.seed = kv.get_uint64("seed", s.seed);
  s.stream = kv.get_uint64("stream", s.stream);
  return s;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw config_error("cannot write output file: " + path);
}

std::string sample_csv(const ProbedSample& s) {
  std::string out = "# xi=" + fmt17(s.xi) + "\n";
  out += "index,time,value,idle\n";
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double t = s.times ? (*s.times)[i] : 0.0;
    out += csv_row({std::to_string(i), fmt17(t), fmt17(s.values[i]),
                    s.idle[i] ? "1" : "0"});
  }
  return out;
}

ProbedSample read_sample_csv(const std::string& path,
                             std::optional<double> xi_override) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read sample file: " + path);
  ProbedSample s;
  s.xi = 0.0;
  std::vector<double> times;
  std::string line;
  bool saw_header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.front() == '#') {
      const std::size_t pos = line.find("xi=");
      if (pos != std::string::npos)
        s.xi = detail::parse_double(line.substr(pos + 3), "sample xi");
      continue;
    }
    if (detail::trim(line).empty()) continue;
    if (!saw_header) {
      if (detail::trim(line) != "index,time,value,idle")
        throw config_error(path + ": expected header index,time,value,idle");
      saw_header = true;
      continue;
    }
    const auto cells = detail::split(line, ',');
    if (cells.size() != 4)
      throw config_error(path + " line " + std::to_string(lineno) +
                         ": expected 4 cells");
    times.push_back(detail::parse_double(cells[1], "sample time"));
    s.values.push_back(detail::parse_double(cells[2], "sample value"));
    s.idle.push_back(detail::parse_double(cells[3], "sample idle") != 0.0 ? 1
                                                                          : 0);
  }
  if (!saw_header || s.values.empty())
    throw config_error(path + ": no sample rows found");
  s.times = std::move(times);
  if (xi_override) s.xi = *xi_override;
  if (!(s.xi > 0.0))
    throw config_error(path + ": no probe rate found; pass --xi");
  return s;
}

int run_simulate(const std::string& config_path,
                 std::optional<std::uint64_t> seed, const std::string& out) {
  SimulateSettings s = read_simulate_settings(config_path);
  if (seed) s.seed = *seed;
  SimulationConfig sc;
  sc.model = s.model;
  sc.xi = s.xi;
  sc.n_probes = s.n;
  sc.v0 = s.v0;
  sc.burn_in = s.burn_in;
  sc.grid_step = s.grid_step;
  sc.seed = s.seed;
  sc.stream_id = s.stream;
  const ProbedSample sample = simulate_probed_workload(sc);
  write_file(out, sample_csv(sample));
  std::printf("wrote %s (n=%zu, xi=%s, seed=%llu, stream=%llu)\n", out.c_str(),
              sample.n(), fmt17(s.xi).c_str(),
              static_cast<unsigned long long>(s.seed),
              static_cast<unsigned long long>(s.stream));
  return 0;
}

int run_estimate(const std::string& in_path, std::optional<double> xi,
                 const std::string& method_name, std::size_t m, double tau,
                 const std::string& config_path, const std::string& grid_spec,
                 const std::string& out) {
  const ProbedSample sample = read_sample_csv(in_path, xi);
  const PsiMethod method = parse_psi_method(method_name);

  std::optional<LevyExponentModel> model;
  if (!config_path.empty()) {
    model = ExperimentConfig::from_config(KeyValueConfig::from_file(config_path))
                .model;
  }

  double psi_hat = 0.0;
  switch (method) {
    case PsiMethod::mle: {
      std::optional<double> bound;
      if (model && model->cp_rate > 0.0) bound = model->cp_rate;
      const PsiEstimate est = mle_psi(sample, bound);
      psi_hat = est.value;
      if (est.at_boundary)
        std::fprintf(stderr,
                     "warning: mle psi estimate sits on the search boundary\n");
      break;
    }
    case PsiMethod::threshold_moment: {
      if (m == 0)
        throw config_error("estimate: the threshold route needs --m >= 1");
      const ThresholdEstimate est = threshold_theta(sample, m, tau);
      psi_hat = est.psi_tilde;
      std::printf("theta_hat=%s\n", fmt17(est.theta_hat).c_str());
      std::printf("bias_bound=%s\n", fmt17(est.bias_bound).c_str());
      if (est.fallback_used)
        std::fprintf(stderr, "warning: threshold estimate used a fallback\n");
      break;
    }
    case PsiMethod::oracle: {
      if (!model)
        throw config_error("estimate: --psi-method oracle needs --config "
                           "with the true model");
      psi_hat = psi(*model, sample.xi);
      break;
    }
  }

  std::printf("psi_hat=%s\n", fmt17(psi_hat).c_str());
  std::printf("n=%zu\n", sample.n());

  std::string curve = "alpha,phi_hat\n";
  for (double a : parse_grid(grid_spec))
    curve += csv_row({fmt17(a), fmt17(z_estimate_phi(sample, psi_hat, a))});
  write_file(out, curve);
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int run_experiment(ExperimentConfig cfg) {
  const ExperimentResult res = run_scenario(cfg);
  std::printf("scenario=%s kind=%s reps=%zu rows=%zu\n",
              cfg.scenario.empty() ? "generic" : cfg.scenario.c_str(),
              to_string(cfg.kind), cfg.reps, res.rows.size());
  for (const std::string& f : res.files)
    std::printf("wrote %s/%s\n", cfg.out_dir.c_str(), f.c_str());
  std::printf("wall_time_ms=%.1f\n", res.wall_time_ms);
  return 0;
}

int run_list_scenarios() {
  for (const std::string& name : scenario_names())
    std::printf("%s  %s\n", name.c_str(), scenario_description(name).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "levyq: spectrally-positive Levy queue simulation and Laplace-exponent "
      "estimation from Poisson probes"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand(
      "simulate", "Simulate a probe-sampled workload and write sample CSV");
  std::string sim_config;
  std::optional<std::uint64_t> sim_seed;
  std::string sim_out = "sample.csv";
  sim->add_option("--config", sim_config,
                  "flat key=value config (model fields, xi, n, burn_in, v0, "
                  "grid_step, seed, stream); model defaults to M/M/1(0.8, 1)")
      ->required();
  sim->add_option("--seed", sim_seed, "override the base seed");
  sim->add_option("--out", sim_out, "output CSV path (default sample.csv)");

  // estimate
  auto* est = app.add_subcommand(
      "estimate", "Estimate psi(xi) and the exponent curve from a sample CSV");
  std::string est_in = "sample.csv";
  std::optional<double> est_xi;
  std::string est_method = "mle";
  std::size_t est_m = 0;
  double est_tau = 0.0;
  std::string est_config;
  std::string est_grid = "0.1:0.1:5";
  std::string est_out = "curve.csv";
  est->add_option("--in", est_in, "sample CSV from `simulate`");
  est->add_option("--xi", est_xi, "probe rate override");
  est->add_option("--psi-method", est_method, "mle | threshold | oracle");
  est->add_option("--m", est_m, "threshold route: qualifying pairs");
  est->add_option("--tau", est_tau, "threshold route: threshold (default 0)");
  est->add_option("--config", est_config,
                  "model config (MLE search bound / oracle psi)");
  est->add_option("--alphas", est_grid,
                  "curve grid: lo:step:hi, log:lo:hi:count or a list");
  est->add_option("--out", est_out, "curve CSV path (default curve.csv)");

  // asymptotics
  auto* asy = app.add_subcommand(
      "asymptotics", "Tabulate asymptotic constants for a model config");
  std::string asy_config;
  std::string asy_out = "out";
  asy->add_option("--config", asy_config,
                  "flat key=value config (model, xi or xi_list, alphas)")
      ->required();
  asy->add_option("--out", asy_out, "output directory (default out)");

  // experiment
  auto* exp = app.add_subcommand(
      "experiment", "Run a Monte Carlo scenario and write its CSV outputs");
  std::string exp_scenario;
  std::string exp_config;
  std::optional<std::uint64_t> exp_seed;
  std::optional<std::string> exp_out;
  std::optional<std::size_t> exp_threads;
  std::optional<std::string> exp_backend;
  std::optional<std::size_t> exp_reps;
  exp->add_option("--scenario", exp_scenario,
                  "built-in scenario name (see list-scenarios)");
  exp->add_option("--config", exp_config, "flat key=value experiment config");
  exp->add_option("--seed", exp_seed, "override the base seed");
  exp->add_option("--out", exp_out, "output directory");
  exp->add_option("--threads", exp_threads, "worker threads (default 1)");
  exp->add_option("--backend", exp_backend,
                  "expectation backend: exact-mm1 | plugin | gpk");
  exp->add_option("--reps", exp_reps,
                  "independent replications (default: scenario's single run)");

  // list-scenarios
  app.add_subcommand("list-scenarios", "List the built-in scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_config, sim_seed, sim_out);
    if (est->parsed())
      return run_estimate(est_in, est_xi, est_method, est_m, est_tau,
                          est_config, est_grid, est_out);
    if (asy->parsed()) {
      ExperimentConfig cfg =
          ExperimentConfig::from_config(KeyValueConfig::from_file(asy_config));
      cfg.kind = ScenarioKind::asymptotics;
      cfg.out_dir = asy_out;
      return run_experiment(cfg);
    }
    if (exp->parsed()) {
      if (exp_scenario.empty() == exp_config.empty())
        throw config_error(
            "experiment: pass exactly one of --scenario and --config");
      ExperimentConfig cfg =
          exp_config.empty()
              ? ExperimentConfig::built_in(exp_scenario)
              : ExperimentConfig::from_config(
                    KeyValueConfig::from_file(exp_config));
      if (exp_seed) cfg.seed = *exp_seed;
      if (exp_out) cfg.out_dir = *exp_out;
      if (exp_threads) cfg.threads = *exp_threads;
      if (exp_backend) cfg.backend = parse_backend(*exp_backend);
      if (exp_reps) cfg.reps = *exp_reps;
      return run_experiment(cfg);
    }
    return run_list_scenarios();
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const invalid_model_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const stability_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const levyq::error& e) {
    // numeric_error, singularity_error, method_inapplicable_error,
    // insufficient_data_error, identification_error
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
