#ifndef LEVYQ_SIMULATE_HPP
#define LEVYQ_SIMULATE_HPP

/**
 * Probe-sampled workload simulation.
 *
 * The workload V(t) of a queue fed by the spectrally-positive Lévy input
 * X(t) described by a LevyExponentModel is sampled at the epochs of an
 * independent Poisson(xi) probe process.  Two regimes are used:
 *
 *  - event-exact: when the input is compound Poisson plus negative drift
 *    (bm_var == 0 and gamma_shape == 0), the workload path is piecewise
 *    linear between jumps and the probe states are computed without any
 *    discretisation error;
 *  - grid: otherwise (Brownian and/or Gamma-subordinator components) each
 *    probe gap is subdivided into steps of length at most h, the increment
 *    of X over each step is drawn exactly, and the reflection at zero is
 *    applied once per step.  Grid reflection loses boundary local time, so
 *    the simulated workload is stochastically below the true one; halving
 *    h tightens the approximation (see the refinement test).
 *
 * Draw order is part of the reproducibility contract.  Per probe gap the
 * Exp(xi) gap length is drawn first.  Event-exact regime: arrival waits
 * Exp(cp_rate) alternate with Gamma(cp_shape, cp_rate_param) jump sizes; the
 * arrival clock is redrawn after each probe (memorylessness).  Grid regime,
 * per step of length u: Normal(0, sqrt(bm_var*u)) if bm_var > 0, then
 * Gamma(gamma_shape*u, gamma_rate) if gamma_shape > 0, then a Poisson
 * (cp_rate*u) jump count followed by that many Gamma(cp_shape,
 * cp_rate_param) jump sizes.  A trailing partial step of length
 * gap - floor(gap/h)*h is taken only when strictly positive.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "levyq/errors.hpp"
#include "levyq/exponent.hpp"
#include "levyq/rng.hpp"

namespace levyq {

/**
 * A workload trajectory observed at Poisson probe epochs.
 *
 * `values` holds V_0, ..., V_n where V_0 is the state at the (time-reset)
 * origin after any burn-in and V_1..V_n are the states at the probe epochs
 * T_1 < ... < T_n.  `idle[i]` is the exact-zero indicator Y_i = 1{V_i == 0};
 * idle states are exact floating-point zeros, never small positives.
 * `times`, when present, holds T_0 = 0, T_1, ..., T_n.
 */
struct ProbedSample {
  double xi = 1.0;
  std::vector<double> values;
  std::vector<std::uint8_t> idle;
  std::optional<std::vector<double>> times;
  bool event_exact = false;

  /** Number of probe transitions (values.size() - 1). */
  std::size_t n() const { return values.empty() ? 0 : values.size() - 1; }
};

struct SimulationConfig {
  LevyExponentModel model{};
  double xi = 1.0;
  std::size_t n_probes = 0;
  double v0 = 0.0;
  /** Probe gaps discarded before V_0 is recorded. */
  std::size_t burn_in = 1000;
  /** Grid step h; 0 selects the default min(1/(10*xi), 0.01). Ignored in the event-exact regime. */
  double grid_step = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  bool event_exact() const {
    return model.bm_var == 0.0 && model.gamma_shape == 0.0;
  }

  double effective_grid_step() const {
    if (grid_step > 0.0) return grid_step;
    return std::min(1.0 / (10.0 * xi), 0.01);
  }

  /** Validates everything except n_probes (streaming users run open-ended). */
  void validate() const {
    model.validate();
    if (!model.is_stable())
      throw stability_error("SimulationConfig: model must be stable (mean input < 0)");
    if (!(xi > 0.0) || !std::isfinite(xi))
      throw config_error("SimulationConfig: xi must be positive and finite");
    if (!(v0 >= 0.0) || !std::isfinite(v0))
      throw config_error("SimulationConfig: v0 must be >= 0 and finite");
    if (grid_step < 0.0 || !std::isfinite(grid_step))
      throw config_error("SimulationConfig: grid_step must be >= 0 and finite");
  }
};

/**
 * Stateful simulator advancing the workload from one probe epoch to the
 * next.  Consumes one rng stream; the same (seed, stream_id) pair always
 * reproduces the same trajectory bit for bit.
 */
class workload_simulator {
 public:
  explicit workload_simulator(const SimulationConfig& cfg)
      : model_(cfg.model),
        xi_(cfg.xi),
        v_(cfg.v0),
        event_exact_(cfg.event_exact()),
        h_(event_exact_ ? 0.0 : cfg.effective_grid_step()),
        rng_(cfg.seed, cfg.stream_id) {
    cfg.validate();
  }

  double state() const { return v_; }
  bool event_exact() const { return event_exact_; }
  double grid_step() const { return h_; }

  /** Advances to the next probe epoch and returns the Exp(xi) gap length. */
  double step() {
    const double gap = rng_.exponential(xi_);
    if (event_exact_) {
      advance_event_exact(gap);
    } else {
      advance_grid(gap);
    }
    return gap;
  }

 private:
  void advance_event_exact(double gap) {
    double remaining = gap;
    for (;;) {
      const double wait = model_.cp_rate > 0.0
                              ? rng_.exponential(model_.cp_rate)
                              : std::numeric_limits<double>::infinity();
      if (wait >= remaining) {
        v_ = std::max(0.0, v_ + model_.bm_drift * remaining);
        return;
      }
      v_ = std::max(0.0, v_ + model_.bm_drift * wait);
      v_ += rng_.gamma(model_.cp_shape, model_.cp_rate_param);
      remaining -= wait;
    }
  }

  void advance_grid(double gap) {
    const double steps = std::floor(gap / h_);
    if (steps >= 1e12)
      throw numeric_error("workload_simulator: probe gap spans too many grid steps");
    const auto whole = static_cast<std::uint64_t>(steps);
    for (std::uint64_t k = 0; k < whole; ++k) substep(h_);
    const double partial = gap - steps * h_;
    if (partial > 0.0) substep(partial);
  }

  void substep(double u) {
    double dx = model_.bm_drift * u;
    if (model_.bm_var > 0.0) dx += rng_.normal(0.0, std::sqrt(model_.bm_var * u));
    if (model_.gamma_shape > 0.0) dx += rng_.gamma(model_.gamma_shape * u, model_.gamma_rate);
    if (model_.cp_rate > 0.0) {
      const std::uint64_t jumps = rng_.poisson(model_.cp_rate * u);
      for (std::uint64_t j = 0; j < jumps; ++j)
        dx += rng_.gamma(model_.cp_shape, model_.cp_rate_param);
    }
    v_ = std::max(0.0, v_ + dx);
  }

  LevyExponentModel model_;
  double xi_;
  double v_;
  bool event_exact_;
  double h_;
  rng_stream rng_;
};

/** Simulates burn_in discarded gaps followed by n_probes recorded probes. */
inline ProbedSample simulate_probed_workload(const SimulationConfig& cfg) {
  cfg.validate();
  if (cfg.n_probes == 0)
    throw config_error("simulate_probed_workload: n_probes must be >= 1");

  workload_simulator sim(cfg);
  for (std::size_t k = 0; k < cfg.burn_in; ++k) sim.step();

  ProbedSample out;
  out.xi = cfg.xi;
  out.event_exact = sim.event_exact();
  out.values.reserve(cfg.n_probes + 1);
  std::vector<double> times;
  times.reserve(cfg.n_probes + 1);

  out.values.push_back(sim.state());
  times.push_back(0.0);
  double t = 0.0;
  for (std::size_t i = 0; i < cfg.n_probes; ++i) {
    t += sim.step();
    times.push_back(t);
    out.values.push_back(sim.state());
  }

  out.idle.reserve(out.values.size());
  for (double v : out.values) out.idle.push_back(v == 0.0 ? 1 : 0);
  out.times = std::move(times);
  return out;
}

/**
 * Diagnostic residuals of the one-step conditional identities.
 *
 * identity (i):  E[ V_i - V_{i-1} - e^{-psi V_{i-1}} / psi + phi'(0)/xi | V_{i-1} ] = 0,
 * idle stat (ii): E[ Y_i e^{psi V_{i-1}} | V_{i-1} ] = xi / psi,
 *
 * both of which hold for every distribution of V_{i-1} (no stationarity
 * needed), making them sharp checks of the simulated transition kernel
 * against the model's exponent.  Means are reported with their sample
 * standard errors.  Note the idle statistic can have infinite variance when
 * psi exceeds half of the stationary tail decay rate; its SE is then an
 * unreliable yardstick.
 */
struct IdentityResiduals {
  double identity_mean = 0.0;
  double identity_se = 0.0;
  double idle_stat_mean = 0.0;
  double idle_stat_se = 0.0;
  double idle_stat_target = 0.0;
  std::size_t n = 0;
  /**
   * Set when the model has no stochastic input component (pure deterministic
   * drain): the trajectory is then deterministic and the residual test does
   * not discriminate.
   */
  bool model_mismatch = false;
};

inline IdentityResiduals conditional_identity_residuals(const ProbedSample& sample,
                                                        const LevyExponentModel& model) {
  model.validate();
  const std::size_t n = sample.n();
  if (n < 2)
    throw insufficient_data_error(
        "conditional_identity_residuals: need at least 2 probe transitions", n);
  if (sample.values.size() != sample.idle.size())
    throw input_error("conditional_identity_residuals: values/idle size mismatch");

  const double psi_xi = psi(model, sample.xi);
  const double drift0 = phi(model, 0.0, 1);  // phi'(0) = -E X(1) > 0 under stability

  double sum_r = 0.0, sum_r2 = 0.0, sum_s = 0.0, sum_s2 = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double prev = sample.values[i - 1];
    const double r = sample.values[i] - prev - std::exp(-psi_xi * prev) / psi_xi +
                     drift0 / sample.xi;
    const double s = (sample.idle[i] != 0 ? std::exp(psi_xi * prev) : 0.0);
    sum_r += r;
    sum_r2 += r * r;
    sum_s += s;
    sum_s2 += s * s;
  }

  const auto dn = static_cast<double>(n);
  IdentityResiduals out;
  out.n = n;
  out.identity_mean = sum_r / dn;
  out.identity_se =
      std::sqrt(std::max(0.0, sum_r2 / dn - out.identity_mean * out.identity_mean) / dn);
  out.idle_stat_mean = sum_s / dn;
  out.idle_stat_se =
      std::sqrt(std::max(0.0, sum_s2 / dn - out.idle_stat_mean * out.idle_stat_mean) / dn);
  out.idle_stat_target = sample.xi / psi_xi;
  out.model_mismatch =
      model.cp_rate == 0.0 && model.bm_var == 0.0 && model.gamma_shape == 0.0;
  return out;
}

}  // namespace levyq

#endif  // LEVYQ_SIMULATE_HPP
