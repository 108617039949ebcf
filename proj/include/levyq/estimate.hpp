#ifndef LEVYQ_ESTIMATE_HPP
#define LEVYQ_ESTIMATE_HPP

/**
 * Estimation of the input's Laplace exponent from probe-sampled workloads.
 *
 * The centrepiece is the Z-estimator phi_hat(alpha; psi_n) built from the
 * one-step conditional Laplace transform of the workload between probes; it
 * needs an intermediate estimate psi_n of psi(xi) = phi^{-1}(xi), supplied by
 * either
 *  - mle_psi: maximum likelihood from the idle indicators, applicable when
 *    the input is compound Poisson (the workload has an atom at zero), or
 *  - threshold_theta / threshold_psi: a moment route based on conditional
 *    drift above a threshold tau, applicable to any stable input.
 *
 * estimate_moments recovers the first two cumulants of X(1) from the same
 * sample, identify_cp extracts the jump-size Laplace transform of a
 * compound Poisson input from an estimated exponent curve, and fit_brownian
 * reads off a Brownian (drift, variance) pair from the cumulant estimates.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levyq/errors.hpp"
#include "levyq/exponent.hpp"
#include "levyq/matrix.hpp"
#include "levyq/simulate.hpp"

namespace levyq {

enum class PsiMethod { mle, threshold_moment, oracle };

inline const char* to_string(PsiMethod m) {
  switch (m) {
    case PsiMethod::mle: return "mle";
    case PsiMethod::threshold_moment: return "threshold_moment";
    case PsiMethod::oracle: return "oracle";
  }
  return "unknown";
}

struct PsiEstimate {
  double value = 0.0;
  PsiMethod method = PsiMethod::oracle;
  /** Search space the estimator ran over (informational for oracle). */
  double space_lo = 0.0;
  double space_hi = 0.0;
  /** True when the optimum sat on an edge of the search space. */
  bool at_boundary = false;
  /** Plug-in variance of the estimate (1 / (n * I_n) for the MLE). */
  std::optional<double> variance{};
};

struct PhiCurveEstimate {
  std::vector<double> alphas;
  std::vector<double> values;
  double psi_used = 0.0;
  std::size_t n = 0;
  /** Optional plug-in covariance of sqrt(n) * (phi_hat - phi) on `alphas`. */
  std::optional<Matrix> covariance{};
  std::vector<std::string> warnings;
};

struct MomentEstimates {
  /** Estimate of E X(1) (the net input rate, negative under stability). */
  double mean_rate = 0.0;
  /** Estimate of Var X(1) = phi''(0). */
  double variance_rate = 0.0;
};

struct ThresholdEstimate {
  double tau = 0.0;
  /** Number of qualifying pairs requested/used. */
  std::size_t m = 0;
  /** Total probe transitions consumed to collect the m pairs. */
  std::size_t total_probes = 0;
  /** theta_hat_m(tau): conditional drift estimate; -theta_hat estimates phi'(0) up to bias. */
  double theta_hat = 0.0;
  /** Data-driven upper bound on the positive bias theta_hat + phi'(0). */
  double bias_bound = 0.0;
  /** psi estimate backing the bias bound. */
  double psi_tilde = 0.0;
  /** Any internal fallback engaged (psi root missing or no near-zero pairs). */
  bool fallback_used = false;
};

struct BrownianFit {
  double drift = 0.0;
  double variance = 0.0;
};

struct CpIdentification {
  double lambda_hat = 0.0;
  double alpha_plus = 0.0;
  std::vector<double> alphas;
  /** Jump-size LST estimates G*(alpha), clamped to [0, 1]. */
  std::vector<double> g_star;
  std::vector<std::uint8_t> clamped;
  std::size_t clamped_count = 0;
};

namespace detail {

inline void require_transitions(const ProbedSample& s, std::size_t need, const char* who) {
  if (s.n() < need)
    throw insufficient_data_error(std::string(who) + ": too few probe transitions", s.n());
  if (!(s.xi > 0.0) || !std::isfinite(s.xi))
    throw input_error(std::string(who) + ": sample has invalid xi");
}

}  // namespace detail

/**
 * Z-estimator of phi(alpha) given an intermediate estimate psi_n of
 * phi^{-1}(xi):
 *
 *   phi_hat(alpha; psi_n) = (xi alpha / psi_n) *
 *     [ (psi_n / (alpha n)) (e^{-alpha V_n} - e^{-alpha V_0})
 *       + (1/n) sum_{i=1..n} e^{-psi_n V_{i-1}} ]
 *     / [ (1/n) sum_{i=1..n} e^{-alpha V_i} ].
 *
 * At alpha = psi_n the expression telescopes to exactly xi for every sample.
 */
inline double z_estimate_phi(const ProbedSample& s, double psi_n, double alpha) {
  detail::require_transitions(s, 1, "z_estimate_phi");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw input_error("z_estimate_phi: alpha must be positive and finite");
  if (!(psi_n > 0.0) || !std::isfinite(psi_n))
    throw input_error("z_estimate_phi: psi_n must be positive and finite");

  const std::size_t n = s.n();
  const auto dn = static_cast<double>(n);
  double sum_prev = 0.0;  // sum of e^{-psi_n V_{i-1}}
  double sum_cur = 0.0;   // sum of e^{-alpha V_i}
  for (std::size_t i = 1; i <= n; ++i) {
    sum_prev += std::exp(-psi_n * s.values[i - 1]);
    sum_cur += std::exp(-alpha * s.values[i]);
  }
  const double boundary =
      (psi_n / (alpha * dn)) * (std::exp(-alpha * s.values[n]) - std::exp(-alpha * s.values[0]));
  const double numerator = boundary + sum_prev / dn;
  const double denominator = sum_cur / dn;
  if (denominator <= 0.0)
    throw numeric_error("z_estimate_phi: degenerate empirical transform");
  return (s.xi * alpha / psi_n) * numerator / denominator;
}

/**
 * Evaluates the Z-estimator on a grid.  Grid points within 1e-3 of psi_n are
 * dropped with a warning: at alpha = psi_n the estimator is identically xi
 * and carries no information about phi.
 */
inline PhiCurveEstimate phi_curve(const ProbedSample& s, double psi_n,
                                  const std::vector<double>& alphas) {
  detail::require_transitions(s, 1, "phi_curve");
  if (alphas.empty()) throw input_error("phi_curve: empty alpha grid");

  PhiCurveEstimate out;
  out.psi_used = psi_n;
  out.n = s.n();
  out.alphas.reserve(alphas.size());
  out.values.reserve(alphas.size());
  for (double a : alphas) {
    if (std::abs(a - psi_n) < 1e-3) {
      out.warnings.push_back("alpha = " + std::to_string(a) +
                             " dropped: within 1e-3 of the intermediate estimate psi_n");
      continue;
    }
    out.alphas.push_back(a);
    out.values.push_back(z_estimate_phi(s, psi_n, a));
  }
  if (out.alphas.empty())
    throw input_error("phi_curve: every grid point collided with psi_n");
  return out;
}

/**
 * Moment estimates of (E X(1), Var X(1)) from the stationary sample:
 *
 *   theta_n  = -(xi / (n psi_n)) sum e^{-psi_n V_{i-1}},
 *   theta2_n = xi * mean[ V_i^2 - V_{i-1}^2
 *                         - 2 (theta_n/xi)(V_{i-1} + e^{-psi_n V_{i-1}}/psi_n)
 *                         - 2 theta_n^2 / xi^2 ].
 */
inline MomentEstimates estimate_moments(const ProbedSample& s, double psi_n) {
  detail::require_transitions(s, 1, "estimate_moments");
  if (!(psi_n > 0.0) || !std::isfinite(psi_n))
    throw input_error("estimate_moments: psi_n must be positive and finite");

  const std::size_t n = s.n();
  const auto dn = static_cast<double>(n);
  double sum_exp = 0.0;
  for (std::size_t i = 1; i <= n; ++i) sum_exp += std::exp(-psi_n * s.values[i - 1]);
  const double theta = -(s.xi / (dn * psi_n)) * sum_exp;

  double acc = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double prev = s.values[i - 1];
    const double cur = s.values[i];
    acc += cur * cur - prev * prev -
           2.0 * (theta / s.xi) * (prev + std::exp(-psi_n * prev) / psi_n) -
           2.0 * theta * theta / (s.xi * s.xi);
  }

  MomentEstimates out;
  out.mean_rate = theta;
  out.variance_rate = s.xi * acc / dn;
  return out;
}

/** Log-likelihood of the idle indicators given psi (up to model-free terms). */
inline double mle_log_likelihood(const ProbedSample& s, double psi) {
  detail::require_transitions(s, 1, "mle_log_likelihood");
  if (s.idle.size() != s.values.size())
    throw input_error("mle_log_likelihood: sample lacks idle indicators");
  if (!(psi > s.xi))
    throw input_error("mle_log_likelihood: psi must exceed xi");

  const double log_xi = std::log(s.xi);
  const double log_psi = std::log(psi);
  double ll = 0.0;
  for (std::size_t i = 1; i <= s.n(); ++i) {
    const double prev = s.values[i - 1];
    if (s.idle[i] != 0) {
      ll += log_xi - log_psi - psi * prev;
    } else {
      ll += std::log1p(-(s.xi / psi) * std::exp(-psi * prev));
    }
  }
  return ll;
}

/** Score (d/d psi) of mle_log_likelihood. */
inline double mle_score(const ProbedSample& s, double psi) {
  detail::require_transitions(s, 1, "mle_score");
  if (s.idle.size() != s.values.size())
    throw input_error("mle_score: sample lacks idle indicators");
  if (!(psi > s.xi)) throw input_error("mle_score: psi must exceed xi");

  double score = 0.0;
  for (std::size_t i = 1; i <= s.n(); ++i) {
    const double prev = s.values[i - 1];
    const double q = (s.xi / psi) * std::exp(-psi * prev);
    const double y = s.idle[i] != 0 ? 1.0 : 0.0;
    score += (1.0 / psi + prev) * (q - y) / (1.0 - q);
  }
  return score;
}

/**
 * Maximum-likelihood estimate of psi(xi) from the idle indicators.  Valid
 * for compound-Poisson input, where the stationary workload has an atom at
 * zero and psi(xi) > xi.
 *
 * The search space is [xi (1 + 1e-6), xi + C] with C the compound Poisson
 * rate when known (psi <= xi + rate for unit drain) and C = 100 otherwise.
 * A 256-point scan locates the mode; golden-section refines it to 1e-9.
 * Samples that are all-idle (all-busy) push the optimum to the lower
 * (upper) edge, reported via at_boundary.
 */
inline PsiEstimate mle_psi(const ProbedSample& s,
                           std::optional<double> cp_rate_bound = std::nullopt) {
  detail::require_transitions(s, 1, "mle_psi");
  if (s.idle.size() != s.values.size())
    throw input_error("mle_psi: sample lacks idle indicators");
  if (cp_rate_bound && !(*cp_rate_bound > 0.0))
    throw input_error("mle_psi: cp_rate_bound must be positive");

  const double lo = s.xi * (1.0 + 1e-6);
  const double hi = s.xi + (cp_rate_bound ? *cp_rate_bound : 100.0);

  constexpr int kGridPoints = 256;
  int best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  auto grid_at = [&](int k) {
    return lo + (hi - lo) * static_cast<double>(k) / (kGridPoints - 1);
  };
  for (int k = 0; k < kGridPoints; ++k) {
    const double ll = mle_log_likelihood(s, grid_at(k));
    if (ll > best_ll) {
      best_ll = ll;
      best = k;
    }
  }

  double a = grid_at(std::max(0, best - 1));
  double b = grid_at(std::min(kGridPoints - 1, best + 1));
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = mle_log_likelihood(s, x1);
  double f2 = mle_log_likelihood(s, x2);
  while (b - a > 1e-9) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = mle_log_likelihood(s, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = mle_log_likelihood(s, x1);
    }
  }
  double value = 0.5 * (a + b);

  // For large n the log-likelihood is numerically flat around its mode (the
  // quadratic variation over 1e-7 in psi sits below the rounding noise of an
  // n-term sum), which stalls value-based search short of the root of the
  // score.  Polish by bisecting the score, which is computed to full
  // precision, whenever it brackets a sign change around the located mode.
  {
    double wa = std::max(lo, value - 1e-4 * std::max(1.0, value));
    double wb = std::min(hi, value + 1e-4 * std::max(1.0, value));
    if (wa < wb && mle_score(s, wa) > 0.0 && mle_score(s, wb) < 0.0) {
      for (int it = 0; it < 100 && wb - wa > 1e-12 * std::max(1.0, wa); ++it) {
        const double mid = 0.5 * (wa + wb);
        (mle_score(s, mid) > 0.0 ? wa : wb) = mid;
      }
      value = 0.5 * (wa + wb);
    }
  }

  PsiEstimate out;
  out.method = PsiMethod::mle;
  out.space_lo = lo;
  out.space_hi = hi;
  const double edge = 1e-7 * (hi - lo);
  if (value - lo <= edge) {
    value = lo;
    out.at_boundary = true;
  } else if (hi - value <= edge) {
    value = hi;
    out.at_boundary = true;
  }
  out.value = value;

  if (!out.at_boundary) {
    // Plug-in observed information: I_n = (1/n) sum q (1/psi + v)^2 / (1 - q).
    double info = 0.0;
    for (std::size_t i = 1; i <= s.n(); ++i) {
      const double prev = s.values[i - 1];
      const double q = (s.xi / value) * std::exp(-value * prev);
      const double g = 1.0 / value + prev;
      info += q * g * g / (1.0 - q);
    }
    if (info > 0.0) out.variance = 1.0 / info;  // = 1 / (n * I_n)
  }
  return out;
}

/**
 * Moment-route estimate of psi(xi): the root in psi of
 *
 *   sum_{i=1..n} e^{-psi V_{i-1}} / psi = V_n - V_0 - n theta_hat / xi.
 *
 * The right side derives from telescoping the one-step conditional mean with
 * the drift estimate theta_hat in place of E X(1).  When the right side is
 * not positive no root exists and the estimate falls back to psi_bar
 * (reported via at_boundary); a root beyond psi_bar is likewise clamped.
 */
inline PsiEstimate threshold_psi(const ProbedSample& s, double theta_hat,
                                 double psi_bar = 1e6) {
  detail::require_transitions(s, 1, "threshold_psi");
  if (!(psi_bar > 0.0)) throw input_error("threshold_psi: psi_bar must be positive");

  const std::size_t n = s.n();
  const double rhs =
      s.values[n] - s.values[0] - static_cast<double>(n) * theta_hat / s.xi;

  PsiEstimate out;
  out.method = PsiMethod::threshold_moment;
  out.space_lo = 0.0;
  out.space_hi = psi_bar;

  auto lhs = [&](double p) {
    double sum = 0.0;
    for (std::size_t i = 1; i <= n; ++i) sum += std::exp(-p * s.values[i - 1]);
    return sum / p;
  };

  if (!(rhs > 0.0) || lhs(psi_bar) > rhs) {
    out.value = psi_bar;
    out.at_boundary = true;
    return out;
  }

  // lhs is strictly decreasing from +inf to 0; bracket [lo, psi_bar].
  double lo = std::min(1.0, psi_bar * 0.5);
  while (lhs(lo) < rhs) lo *= 0.5;  // rhs > 0, so lhs(lo) -> inf as lo -> 0 terminates this
  double hi = psi_bar;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, lo); ++it) {
    const double mid = 0.5 * (lo + hi);
    (lhs(mid) > rhs ? lo : hi) = mid;
  }
  out.value = 0.5 * (lo + hi);
  return out;
}

namespace detail {

/** Shared tail of the threshold estimator once the pairs are collected. */
inline ThresholdEstimate finish_threshold(const ProbedSample& consumed, double tau,
                                          std::size_t m, std::size_t total_probes,
                                          double pair_sum) {
  ThresholdEstimate out;
  out.tau = tau;
  out.m = m;
  out.total_probes = total_probes;
  out.theta_hat = consumed.xi * pair_sum / static_cast<double>(m);

  const PsiEstimate psi_est = threshold_psi(consumed, out.theta_hat);
  out.psi_tilde = psi_est.value;
  out.fallback_used = psi_est.at_boundary;

  // Conditional mean workload one probe after an (almost) idle probe,
  // estimated from pairs with V_{i-1} <= eps.
  const double eps = 0.01 / out.psi_tilde;
  double zsum = 0.0;
  std::size_t zcount = 0;
  for (std::size_t i = 1; i <= consumed.n(); ++i) {
    if (consumed.values[i - 1] <= eps) {
      zsum += consumed.values[i];
      ++zcount;
    }
  }
  double mean_from_zero;
  if (zcount > 0 && zsum > 0.0) {
    mean_from_zero = zsum / static_cast<double>(zcount);
  } else {
    // No informative near-zero pairs: substitute the model identity
    // E[V(T) | V(0)=0] = 1/psi + E X(1) / xi with the plug-in estimates.
    mean_from_zero =
        std::max(0.0, 1.0 / out.psi_tilde + out.theta_hat / consumed.xi);
    out.fallback_used = true;
  }
  out.bias_bound =
      consumed.xi * mean_from_zero * std::exp(-out.psi_tilde * tau);
  return out;
}

}  // namespace detail

/**
 * Threshold drift estimator from a stored sample: averages xi (V_i - V_{i-1})
 * over the first m transitions departing from V_{i-1} >= tau.  Throws
 * insufficient_data_error (carrying the count found) when the sample holds
 * fewer than m qualifying pairs.
 */
inline ThresholdEstimate threshold_theta(const ProbedSample& s, std::size_t m, double tau) {
  detail::require_transitions(s, 1, "threshold_theta");
  if (m == 0) throw input_error("threshold_theta: m must be >= 1");
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw input_error("threshold_theta: tau must be >= 0 and finite");

  double pair_sum = 0.0;
  std::size_t found = 0;
  std::size_t last_index = 0;
  for (std::size_t i = 1; i <= s.n() && found < m; ++i) {
    if (s.values[i - 1] >= tau) {
      pair_sum += s.values[i] - s.values[i - 1];
      ++found;
      last_index = i;
    }
  }
  if (found < m)
    throw insufficient_data_error("threshold_theta: not enough probes above tau", found);

  // Evaluate the auxiliary quantities on the consumed prefix only, so a
  // stored sample and a streaming run over the same trajectory agree exactly.
  ProbedSample prefix;
  prefix.xi = s.xi;
  prefix.event_exact = s.event_exact;
  prefix.values.assign(s.values.begin(),
                       s.values.begin() + static_cast<std::ptrdiff_t>(last_index + 1));
  return detail::finish_threshold(prefix, tau, m, last_index, pair_sum);
}

/**
 * Streaming variant: simulates under cfg (burn-in included) until m
 * qualifying pairs are collected, then returns the estimate along with the
 * consumed trajectory.  A cap of max_probes transitions guards against
 * unreachable thresholds.
 */
inline std::pair<ThresholdEstimate, ProbedSample> threshold_theta_streaming(
    const SimulationConfig& cfg, std::size_t m, double tau,
    std::size_t max_probes = 50000000) {
  if (m == 0) throw input_error("threshold_theta_streaming: m must be >= 1");
  if (!(tau >= 0.0) || !std::isfinite(tau))
    throw input_error("threshold_theta_streaming: tau must be >= 0 and finite");
  cfg.validate();

  workload_simulator sim(cfg);
  for (std::size_t k = 0; k < cfg.burn_in; ++k) sim.step();

  ProbedSample consumed;
  consumed.xi = cfg.xi;
  consumed.event_exact = sim.event_exact();
  consumed.values.push_back(sim.state());

  double pair_sum = 0.0;
  std::size_t found = 0;
  while (found < m) {
    if (consumed.n() >= max_probes)
      throw insufficient_data_error(
          "threshold_theta_streaming: probe cap reached before m pairs", found);
    const double prev = sim.state();
    sim.step();
    consumed.values.push_back(sim.state());
    if (prev >= tau) {
      pair_sum += sim.state() - prev;
      ++found;
    }
  }
  consumed.idle.reserve(consumed.values.size());
  for (double v : consumed.values) consumed.idle.push_back(v == 0.0 ? 1 : 0);

  ThresholdEstimate est =
      detail::finish_threshold(consumed, tau, m, consumed.n(), pair_sum);
  return {est, std::move(consumed)};
}

/**
 * Compound-Poisson identification from an exponent curve.  With unit drain,
 * phi(alpha) = lambda (G*(alpha) - 1) + alpha, so the jump rate and the
 * jump-size transform follow from the curve at a large anchor alpha_plus:
 *
 *   lambda_hat = alpha_plus - phi_hat(alpha_plus),
 *   G*_hat(alpha) = 1 + (phi_hat(alpha) - alpha) / lambda_hat.
 *
 * alpha_plus must be the largest grid point of the curve.  G* estimates are
 * clamped to [0, 1]; clamping is reported per point.
 */
inline CpIdentification identify_cp(const PhiCurveEstimate& curve, double alpha_plus) {
  if (curve.alphas.size() < 2)
    throw input_error("identify_cp: curve needs at least two grid points");
  std::size_t anchor = curve.alphas.size();
  double max_alpha = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    max_alpha = std::max(max_alpha, curve.alphas[i]);
    if (curve.alphas[i] == alpha_plus) anchor = i;
  }
  if (anchor == curve.alphas.size())
    throw input_error("identify_cp: alpha_plus must be a grid point of the curve");
  if (alpha_plus < max_alpha)
    throw input_error("identify_cp: alpha_plus must be the largest grid point");

  CpIdentification out;
  out.alpha_plus = alpha_plus;
  out.lambda_hat = alpha_plus - curve.values[anchor];
  if (!(out.lambda_hat > 0.0))
    throw identification_error(
        "identify_cp: nonpositive jump-rate estimate; curve inconsistent with "
        "compound Poisson input");

  for (std::size_t i = 0; i < curve.alphas.size(); ++i) {
    if (i == anchor) continue;
    const double raw = 1.0 + (curve.values[i] - curve.alphas[i]) / out.lambda_hat;
    const double clamped = std::clamp(raw, 0.0, 1.0);
    out.alphas.push_back(curve.alphas[i]);
    out.g_star.push_back(clamped);
    out.clamped.push_back(clamped != raw ? 1 : 0);
    if (clamped != raw) ++out.clamped_count;
  }
  return out;
}

/**
 * Brownian-input readout of the cumulant estimates: drift = E X(1),
 * variance = Var X(1).
 */
inline BrownianFit fit_brownian(const ProbedSample& s, double psi_n) {
  const MomentEstimates m = estimate_moments(s, psi_n);
  return {m.mean_rate, m.variance_rate};
}

}  // namespace levyq

#endif  // LEVYQ_ESTIMATE_HPP
