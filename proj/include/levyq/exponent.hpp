#ifndef LEVYQ_EXPONENT_HPP
#define LEVYQ_EXPONENT_HPP

/**
 * @file exponent.hpp
 * @brief Parametric spectrally-positive Levy exponent models.
 *
 * The net input of the queue is X(t) = J(t) - t, where J is a
 * subordinator-plus-diffusion input. Its Laplace exponent
 *
 *   phi(alpha) = log E exp(-alpha X(1))
 *              = cp_rate * ((mu/(mu+alpha))^eta - 1)      (compound Poisson,
 *                                                          Gamma(eta, mu) jumps)
 *                - alpha * bm_drift                        (drift, output folded in)
 *                + 0.5 * alpha^2 * bm_var                  (Brownian part)
 *                + gamma_shape * log(gamma_rate/(gamma_rate+alpha))
 *                                                          (Gamma subordinator)
 *
 * is the ground truth of every experiment: phi(0) = 0, phi'(0) = -E X(1), and
 * under stability (E X(1) < 0) phi is strictly increasing and convex on
 * [0, inf), so its inverse psi(xi) = phi^{-1}(xi) is well defined.
 */

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "levyq/errors.hpp"
#include "levyq/quadrature.hpp"

namespace levyq {

/**
 * Three-component Levy exponent model. Immutable by convention: construct,
 * validate, then share freely across threads (all operations are pure).
 */
struct LevyExponentModel {
  double cp_rate = 0.0;       ///< lambda: compound-Poisson jump rate, >= 0
  double cp_shape = 1.0;      ///< eta: Gamma jump shape, > 0 when cp_rate > 0
  double cp_rate_param = 1.0; ///< mu: Gamma jump rate, > 0 when cp_rate > 0
  double bm_drift = -1.0;     ///< d: drift per unit time (unit output folded in)
  double bm_var = 0.0;        ///< sigma^2: Brownian variance per unit time, >= 0
  double gamma_shape = 0.0;   ///< beta: Gamma-subordinator shape rate, >= 0
  double gamma_rate = 1.0;    ///< gamma: Gamma-subordinator rate, > 0 when beta > 0

  /** Throws invalid_model_error when a parameter is outside its domain. */
  void validate() const {
    if (cp_rate < 0.0) throw invalid_model_error("cp_rate must be >= 0");
    if (cp_rate > 0.0 && !(cp_shape > 0.0))
      throw invalid_model_error("cp_shape must be > 0 when cp_rate > 0");
    if (cp_rate > 0.0 && !(cp_rate_param > 0.0))
      throw invalid_model_error("cp_rate_param must be > 0 when cp_rate > 0");
    if (bm_var < 0.0) throw invalid_model_error("bm_var must be >= 0");
    if (gamma_shape < 0.0) throw invalid_model_error("gamma_shape must be >= 0");
    if (gamma_shape > 0.0 && !(gamma_rate > 0.0))
      throw invalid_model_error("gamma_rate must be > 0 when gamma_shape > 0");
    if (!std::isfinite(cp_rate) || !std::isfinite(cp_shape) ||
        !std::isfinite(cp_rate_param) || !std::isfinite(bm_drift) ||
        !std::isfinite(bm_var) || !std::isfinite(gamma_shape) ||
        !std::isfinite(gamma_rate))
      throw invalid_model_error("model parameters must be finite");
  }

  /** E X(1) = lambda*eta/mu + d + beta/gamma. */
  double mean_input() const {
    double m = bm_drift;
    if (cp_rate > 0.0) m += cp_rate * cp_shape / cp_rate_param;
    if (gamma_shape > 0.0) m += gamma_shape / gamma_rate;
    return m;
  }

  /** Stability of the queue: E X(1) < 0, i.e. phi'(0) > 0. */
  bool is_stable() const { return mean_input() < 0.0; }

  /**
   * True iff the input J is a pure subordinator and the only negative drift is
   * the unit output rate (bm_var = 0 and bm_drift = -1 exactly). Only then does
   * the workload hit zero exactly and the conditional idle-probability
   * machinery (and hence the MLE) apply.
   */
  bool is_subordinator() const { return bm_var == 0.0 && bm_drift == -1.0; }

  /**
   * Lower edge of the analytic continuation domain of phi: the Gamma families
   * diverge at -cp_rate_param and -gamma_rate. Returns -infinity when no jump
   * component is present.
   */
  double domain_lower_bound() const {
    double lb = -std::numeric_limits<double>::infinity();
    if (cp_rate > 0.0) lb = std::max(lb, -cp_rate_param);
    if (gamma_shape > 0.0) lb = std::max(lb, -gamma_rate);
    return lb;
  }
};

/**
 * phi and its first two derivatives, analytically per component.
 *
 * @param order 0 -> phi(alpha), 1 -> phi'(alpha), 2 -> phi''(alpha).
 * Accepts any alpha inside the continuation domain (alpha > domain_lower_bound);
 * the estimation-facing contract only ever needs alpha >= 0.
 */
inline double phi(const LevyExponentModel& m, double alpha, int order = 0) {
  m.validate();
  if (order < 0 || order > 2) throw input_error("phi: order must be 0, 1 or 2");
  if (!(alpha > m.domain_lower_bound()))
    throw input_error("phi: alpha outside the continuation domain");

  if (alpha == 0.0) {
    // Closed forms at zero; also the one-sided derivatives quoted by callers.
    if (order == 0) return 0.0;
    if (order == 1) return -m.mean_input();
    double d2 = m.bm_var;
    if (m.cp_rate > 0.0)
      d2 += m.cp_rate * m.cp_shape * (m.cp_shape + 1.0) /
            (m.cp_rate_param * m.cp_rate_param);
    if (m.gamma_shape > 0.0) d2 += m.gamma_shape / (m.gamma_rate * m.gamma_rate);
    return d2;
  }

  double v = 0.0;
  if (m.cp_rate > 0.0) {
    const double mu = m.cp_rate_param;
    const double base = std::pow(mu / (mu + alpha), m.cp_shape);
    switch (order) {
      case 0: v += m.cp_rate * (base - 1.0); break;
      case 1: v += -m.cp_rate * m.cp_shape * base / (mu + alpha); break;
      case 2:
        v += m.cp_rate * m.cp_shape * (m.cp_shape + 1.0) * base /
             ((mu + alpha) * (mu + alpha));
        break;
    }
  }
  switch (order) {
    case 0: v += -alpha * m.bm_drift + 0.5 * m.bm_var * alpha * alpha; break;
    case 1: v += -m.bm_drift + m.bm_var * alpha; break;
    case 2: v += m.bm_var; break;
  }
  if (m.gamma_shape > 0.0) {
    const double g = m.gamma_rate;
    switch (order) {
      case 0: v += m.gamma_shape * std::log(g / (g + alpha)); break;
      case 1: v += -m.gamma_shape / (g + alpha); break;
      case 2: v += m.gamma_shape / ((g + alpha) * (g + alpha)); break;
    }
  }
  return v;
}

/**
 * psi(xi) = phi^{-1}(xi): the unique root of phi(psi) = xi on (0, inf).
 *
 * Bracketed bisection with the upper bracket doubled from xi until
 * phi(u) >= xi, followed by a Newton polish; phi convex and increasing makes
 * this globally safe. Guarantees |phi(psi) - xi| <= 1e-10 * max(1, xi).
 * For subordinator-input models phi(alpha) <= alpha, hence psi(xi) >= xi.
 */
inline double psi(const LevyExponentModel& m, double xi) {
  m.validate();
  if (!(xi > 0.0)) throw input_error("psi: xi must be positive");
  if (!m.is_stable()) throw stability_error("psi: model is not stable (E X(1) >= 0)");

  double lo = 0.0;
  double hi = xi;
  int budget = 0;
  while (phi(m, hi) < xi) {
    lo = hi;
    hi *= 2.0;
    if (++budget > 200)
      throw numeric_error("psi: bracketing budget exhausted", lo, hi);
  }
  // Bisection brings the bracket safely into Newton's quadratic basin.
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (phi(m, mid) < xi)
      lo = mid;
    else
      hi = mid;
  }
  double root = 0.5 * (lo + hi);
  const double tol = 1e-10 * std::max(1.0, xi);
  for (int i = 0; i < 50; ++i) {
    const double f = phi(m, root) - xi;
    if (std::abs(f) <= 0.01 * tol) return root;
    const double step = f / phi(m, root, 1);
    double next = root - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (f > 0.0)
      hi = root;
    else
      lo = root;
    root = next;
  }
  if (std::abs(phi(m, root) - xi) <= tol) return root;
  throw numeric_error("psi: did not converge", lo, hi);
}

/**
 * Generalized Pollaczek-Khintchine stationary LST:
 * E exp(-b V) = b phi'(0) / phi(b) for b > 0, with the limit value 1 at b = 0.
 */
inline double stationary_lst(const LevyExponentModel& m, double b) {
  m.validate();
  if (!m.is_stable())
    throw stability_error("stationary_lst: model is not stable");
  if (b < 0.0) throw input_error("stationary_lst: b must be >= 0");
  if (b == 0.0) return 1.0;
  return b * phi(m, 0.0, 1) / phi(m, b);
}

/**
 * Cramer root: the positive solution omega of phi(-omega) = 0, i.e.
 * E exp(omega X(1)) = 1, confined to the analytic continuation domain
 * (-min(mu, gamma), 0]. Returns nullopt when no root exists there (e.g. the
 * deterministic pure-drift model). Guarantees |phi(-omega)| <= 1e-10.
 */
inline std::optional<double> cramer_root(const LevyExponentModel& m) {
  m.validate();
  if (!m.is_stable()) throw stability_error("cramer_root: model is not stable");

  const double lb = m.domain_lower_bound();  // -min(mu, gamma) or -inf
  // g(w) = phi(-w): g(0) = 0, g'(0) = -phi'(0) < 0, convex; a root exists iff
  // g turns positive inside the domain.
  const auto g = [&](double w) { return phi(m, -w); };

  const bool bounded = std::isfinite(lb);
  if (!bounded && m.bm_var == 0.0) return std::nullopt;  // pure drift: g(w) = w*d < 0

  double hi;
  if (bounded) {
    const double edge = -lb;
    hi = edge * (1.0 - 1e-12);
    double probe = edge * 0.5;
    // March toward the boundary until g turns positive; the Gamma terms
    // diverge to +inf there, so with any jump component this succeeds.
    int budget = 0;
    while (g(probe) <= 0.0) {
      probe = 0.5 * (probe + edge);
      if (++budget > 200) return std::nullopt;
      hi = probe;
    }
    hi = probe;
  } else {
    hi = 1.0;
    int budget = 0;
    while (g(hi) <= 0.0) {
      hi *= 2.0;
      if (++budget > 200) return std::nullopt;
    }
  }

  double lo = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
    if (std::abs(g(mid)) <= 1e-12) break;
  }
  double root = 0.5 * (lo + hi);
  for (int i = 0; i < 50; ++i) {
    const double f = g(root);
    if (std::abs(f) <= 1e-12) break;
    const double deriv = -phi(m, -root, 1);
    const double next = root - f / deriv;
    root = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
    if (f > 0.0)
      hi = root;
    else
      lo = root;
  }
  if (!(std::abs(g(root)) <= 1e-10)) return std::nullopt;
  if (!(root > 0.0)) return std::nullopt;
  return root;
}

/**
 * Closed-form M/M/1 oracle: Poisson(lambda) arrivals of Exp(mu) jobs drained
 * at unit rate. Supplies exact phi, psi and the stationary mixture law used
 * by the EXACT_MM1 expectation backend.
 */
struct Mm1Oracle {
  double arrival_rate = 0.8;  ///< lambda, > 0
  double service_rate = 1.0;  ///< mu, > lambda

  void validate() const {
    if (!(arrival_rate > 0.0) || !(service_rate > arrival_rate))
      throw invalid_model_error("Mm1Oracle requires 0 < lambda < mu");
  }

  /** The equivalent three-component model (eta = 1 exponential jumps). */
  LevyExponentModel to_model() const {
    validate();
    LevyExponentModel m;
    m.cp_rate = arrival_rate;
    m.cp_shape = 1.0;
    m.cp_rate_param = service_rate;
    m.bm_drift = -1.0;
    m.bm_var = 0.0;
    m.gamma_shape = 0.0;
    return m;
  }

  /** phi(alpha) = alpha (mu + alpha - lambda) / (mu + alpha). */
  double phi(double alpha) const {
    validate();
    const double mu = service_rate;
    return alpha * (mu + alpha - arrival_rate) / (mu + alpha);
  }

  /** phi'(alpha), by direct differentiation of the closed form. */
  double phi_deriv(double alpha) const {
    validate();
    const double mu = service_rate;
    const double denom = (mu + alpha) * (mu + alpha);
    return ((2.0 * alpha + mu - arrival_rate) * (mu + alpha) -
            alpha * (mu + alpha - arrival_rate)) / denom;
  }

  /** psi(xi) = (xi + lambda - mu + sqrt((xi + lambda - mu)^2 + 4 xi mu)) / 2. */
  double psi(double xi) const {
    validate();
    const double c = xi + arrival_rate - service_rate;
    return 0.5 * (c + std::sqrt(c * c + 4.0 * xi * service_rate));
  }

  /** Utilization rho = lambda / mu; the stationary atom at zero is 1 - rho. */
  double rho() const { return arrival_rate / service_rate; }

  /**
   * Stationary LST of the workload: atom (1 - rho) at 0 plus density
   * rho (mu - lambda) e^{-(mu - lambda) v}; equals the GPK value.
   */
  double stationary_lst(double b) const {
    validate();
    const double gap = service_rate - arrival_rate;
    return (1.0 - rho()) + rho() * gap / (gap + b);
  }

  /**
   * E f(V) under the stationary mixture: (1 - rho) f(0) plus adaptive GK15
   * quadrature of f against the exponential density, truncated where the tail
   * mass is below 4e-18 of the total.
   */
  template <typename Fn>
  double expectation(const Fn& f, double abs_tol = 1e-10) const {
    validate();
    const double gap = service_rate - arrival_rate;
    const double upper = 40.0 / gap;
    const double density_weight = rho() * gap;
    const double integral = integrate(
        [&](double v) { return f(v) * density_weight * std::exp(-gap * v); },
        0.0, upper, abs_tol);
    return (1.0 - rho()) * f(0.0) + integral;
  }

  /** Like expectation(), but restricted to {V >= tau}. */
  template <typename Fn>
  double tail_expectation(const Fn& f, double tau, double abs_tol = 1e-10) const {
    validate();
    const double gap = service_rate - arrival_rate;
    const double upper = std::max(tau, 0.0) + 40.0 / gap;
    const double density_weight = rho() * gap;
    const double atom = (tau <= 0.0) ? (1.0 - rho()) * f(0.0) : 0.0;
    const double lo = std::max(tau, 0.0);
    const double integral = integrate(
        [&](double v) { return f(v) * density_weight * std::exp(-gap * v); },
        lo, upper, abs_tol);
    return atom + integral;
  }

  /** P(V >= tau) in closed form. */
  double tail_prob(double tau) const {
    validate();
    if (tau <= 0.0) return 1.0;
    const double gap = service_rate - arrival_rate;
    return rho() * std::exp(-gap * tau);
  }
};

}  // namespace levyq

#endif  // LEVYQ_EXPONENT_HPP
