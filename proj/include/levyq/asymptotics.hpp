#ifndef LEVYQ_ASYMPTOTICS_HPP
#define LEVYQ_ASYMPTOTICS_HPP

/**
 * @file asymptotics.hpp
 * @brief Asymptotic-error constants for the probed-workload estimators.
 *
 * Everything in this header evaluates closed-form limit expressions: the
 * estimating-equation variance sigma_alpha^2, the Jacobian entries dJ_psi and
 * dJ_phi, the MLE information I_xi, the cross term sigma_alpha_psi^2, the
 * delta-method variance sigma_alpha_xi^2 of sqrt(n)(phi_hat(alpha) - phi(alpha)),
 * the pairwise covariances sigma_{alpha,beta}^2 assembled into a matrix Sigma,
 * the threshold-estimator limit theta(tau) with its asymptotic bias, and the
 * rough expected-sample-size approximation m*e^{omega*tau}.
 *
 * Several of the constants are expectations with respect to the *stationary
 * workload law*, which is unknown in general.  The StationaryExpectationBackend
 * abstracts how those expectations are resolved:
 *
 *   - exact_mm1: adaptive quadrature against the known M/M/1 stationary
 *     mixture (atom at zero + exponential density), absolute tolerance 1e-10.
 *   - plugin: empirical means over a supplied workload sample, with a
 *     bootstrap standard error available (B resamples of size m, fixed-order
 *     summation, one RNG stream per resample).
 *   - gpk_only: only the transform-level quantities E e^{-bV} and E V e^{-bV}
 *     are available, evaluated analytically from the generalized
 *     Pollaczek-Khintchine formula; path-space expectations are refused.
 *
 * Numerical guard: every per-alpha constant divides by xi - phi(alpha), which
 * vanishes at alpha = psi(xi).  A uniform guard of radius 1e-3*xi around
 * phi(alpha) = xi rejects evaluation points too close to the singularity.
 */

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "levyq/csv.hpp"
#include "levyq/errors.hpp"
#include "levyq/exponent.hpp"
#include "levyq/matrix.hpp"
#include "levyq/rng.hpp"

namespace levyq {

// ---------------------------------------------------------------------------
// Stationary-expectation backends
// ---------------------------------------------------------------------------

/**
 * Resolves expectations E f(V) under the stationary workload law V.
 *
 * Construct through one of the factories:
 *   - StationaryExpectationBackend::exact(oracle)  — exact M/M/1 mixture.
 *   - StationaryExpectationBackend::plugin(values) — empirical plug-in.
 *   - StationaryExpectationBackend::gpk(model)     — transform-only.
 */
class StationaryExpectationBackend {
 public:
  enum class Mode { exact_mm1, plugin, gpk_only };

  /** Exact M/M/1 backend; expectations are quadrature against the mixture. */
  static StationaryExpectationBackend exact(const Mm1Oracle& oracle) {
    oracle.validate();
    StationaryExpectationBackend b(Mode::exact_mm1);
    b.oracle_ = oracle;
    b.model_ = oracle.to_model();
    b.has_model_ = true;
    return b;
  }

  /**
   * Plug-in backend over an observed workload sample.  Expectations are plain
   * means in stored order; bootstrap_se draws `resample_count` independent
   * resamples of size `resample_size` (0 = half the sample) with one RNG
   * stream per resample.
   */
  static StationaryExpectationBackend plugin(std::vector<double> values,
                                             std::size_t resample_count = 500,
                                             std::size_t resample_size = 0,
                                             std::uint64_t seed = 0) {
    if (values.empty())
      throw input_error("StationaryExpectationBackend::plugin: empty sample");
    if (resample_count == 0)
      throw input_error(
          "StationaryExpectationBackend::plugin: resample_count must be >= 1");
    if (resample_size > values.size())
      throw input_error(
          "StationaryExpectationBackend::plugin: resample_size exceeds sample");
    StationaryExpectationBackend b(Mode::plugin);
    b.values_ = std::move(values);
    b.resample_count_ = resample_count;
    b.resample_size_ =
        (resample_size == 0) ? std::max<std::size_t>(1, b.values_.size() / 2)
                             : resample_size;
    b.seed_ = seed;
    return b;
  }

  /** Transform-only backend: lst/v_lst analytic, everything else refused. */
  static StationaryExpectationBackend gpk(const LevyExponentModel& model) {
    model.validate();
    if (!model.is_stable())
      throw stability_error("StationaryExpectationBackend::gpk: unstable model");
    StationaryExpectationBackend b(Mode::gpk_only);
    b.model_ = model;
    b.has_model_ = true;
    return b;
  }

  Mode mode() const noexcept { return mode_; }

  /** Sample size backing a plugin backend (0 for the analytic backends). */
  std::size_t sample_size() const noexcept { return values_.size(); }

  /**
   * Rejects model/backend combinations that would silently answer for the
   * wrong law: the exact backend only speaks for the M/M/1 model it was built
   * from, and the GPK backend only for the model handed to its factory.
   */
  void check_model(const LevyExponentModel& m, const std::string& who) const {
    if (!has_model_) return;  // plugin: the sample, not a model, is authoritative
    const LevyExponentModel& own = model_;
    const bool same = own.cp_rate == m.cp_rate && own.cp_shape == m.cp_shape &&
                      own.cp_rate_param == m.cp_rate_param &&
                      own.bm_drift == m.bm_drift && own.bm_var == m.bm_var &&
                      own.gamma_shape == m.gamma_shape &&
                      own.gamma_rate == m.gamma_rate;
    if (!same)
      throw input_error(who + ": backend was built for a different model");
  }

  /** E f(V).  GPK backend: method_inapplicable_error. */
  double expect(const std::function<double(double)>& f) const {
    switch (mode_) {
      case Mode::exact_mm1:
        return oracle_.expectation(f);
      case Mode::plugin:
        return mean_over(values_, f);
      case Mode::gpk_only:
        break;
    }
    throw method_inapplicable_error(
        "StationaryExpectationBackend: GPK_ONLY cannot evaluate pathwise "
        "expectations; use the exact or plugin backend");
  }

  /** E e^{-bV}. */
  double lst(double b) const {
    if (b < 0.0) throw input_error("backend lst: b must be >= 0");
    if (mode_ == Mode::gpk_only) return stationary_lst(model_, b);
    return expect([b](double v) { return std::exp(-b * v); });
  }

  /**
   * E V e^{-bV}.  Analytic under GPK: differentiating the stationary LST
   * E e^{-bV} = phi'(0) b / phi(b) gives phi'(0)(b phi'(b) - phi(b))/phi(b)^2.
   */
  double v_lst(double b) const {
    if (b <= 0.0) throw input_error("backend v_lst: b must be > 0");
    if (mode_ == Mode::gpk_only) {
      const double pb = phi(model_, b);
      const double dpb = phi(model_, b, 1);
      const double drift0 = phi(model_, 0.0, 1);
      return drift0 * (b * dpb - pb) / (pb * pb);
    }
    return expect([b](double v) { return v * std::exp(-b * v); });
  }

  /** E e^{-bV} 1{V >= tau}.  tau <= 0 reduces to lst(b). */
  double tail_lst(double b, double tau) const {
    if (b < 0.0) throw input_error("backend tail_lst: b must be >= 0");
    switch (mode_) {
      case Mode::exact_mm1:
        return oracle_.tail_expectation(
            [b](double v) { return std::exp(-b * v); }, tau);
      case Mode::plugin:
        return mean_over(values_, [b, tau](double v) {
          return (v >= tau) ? std::exp(-b * v) : 0.0;
        });
      case Mode::gpk_only:
        break;
    }
    throw method_inapplicable_error(
        "StationaryExpectationBackend: GPK_ONLY cannot evaluate tail "
        "expectations");
  }

  /** P(V >= tau). */
  double tail_prob(double tau) const {
    switch (mode_) {
      case Mode::exact_mm1:
        return oracle_.tail_prob(tau);
      case Mode::plugin:
        return mean_over(values_,
                         [tau](double v) { return (v >= tau) ? 1.0 : 0.0; });
      case Mode::gpk_only:
        break;
    }
    throw method_inapplicable_error(
        "StationaryExpectationBackend: GPK_ONLY cannot evaluate tail "
        "probabilities");
  }

  /**
   * Bootstrap standard error of the plug-in estimate of E f(V): standard
   * deviation of the resample means, rescaled by sqrt(m/n) to the full-sample
   * size.  Plugin backend only.
   */
  double bootstrap_se(const std::function<double(double)>& f) const {
    if (mode_ != Mode::plugin)
      throw method_inapplicable_error(
          "bootstrap_se: only the plugin backend carries a sample");
    const std::size_t n = values_.size();
    const std::size_t m = resample_size_;
    std::vector<double> means(resample_count_, 0.0);
    for (std::size_t j = 0; j < resample_count_; ++j) {
      rng_stream rng(seed_, j);
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        std::size_t idx = static_cast<std::size_t>(
            rng.uniform() * static_cast<double>(n));
        if (idx >= n) idx = n - 1;
        acc += f(values_[idx]);
      }
      means[j] = acc / static_cast<double>(m);
    }
    double mbar = 0.0;
    for (double v : means) mbar += v;
    mbar /= static_cast<double>(resample_count_);
    double ss = 0.0;
    for (double v : means) ss += (v - mbar) * (v - mbar);
    const double var_m = ss / static_cast<double>(resample_count_ - 1);
    return std::sqrt(var_m * static_cast<double>(m) /
                     static_cast<double>(n));
  }

 private:
  explicit StationaryExpectationBackend(Mode mode) : mode_(mode) {}

  template <typename Fn>
  static double mean_over(const std::vector<double>& xs, const Fn& f) {
    double acc = 0.0;  // fixed index order: reruns are byte-identical
    for (double x : xs) acc += f(x);
    return acc / static_cast<double>(xs.size());
  }

  Mode mode_;
  Mm1Oracle oracle_{};
  LevyExponentModel model_{};
  bool has_model_ = false;
  std::vector<double> values_;
  std::size_t resample_count_ = 500;
  std::size_t resample_size_ = 0;
  std::uint64_t seed_ = 0;
};

// ---------------------------------------------------------------------------
// Guards and shared helpers
// ---------------------------------------------------------------------------

namespace detail {

/** Common preconditions for the per-alpha constants. */
inline void check_alpha_point(const LevyExponentModel& m, double xi,
                              double alpha, const std::string& who) {
  m.validate();
  if (!m.is_stable()) throw stability_error(who + ": model is not stable");
  if (!(xi > 0.0) || !std::isfinite(xi))
    throw input_error(who + ": xi must be a positive finite real");
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw input_error(who + ": alpha must be a positive finite real");
  // Uniform singularity guard: J(psi_hat, .) divides by xi - phi(alpha),
  // which vanishes at alpha = psi(xi).
  if (std::abs(phi(m, alpha) - xi) <= 1e-3 * xi)
    throw singularity_error(who + ": alpha = " + fmt17(alpha) +
                            " is within the guard radius of psi(xi); "
                            "phi(alpha) - xi = " +
                            fmt17(phi(m, alpha) - xi));
}

/** Subordinator-input precondition shared by the MLE-route constants. */
inline void require_subordinator(const LevyExponentModel& m,
                                 const std::string& who) {
  if (!m.is_subordinator())
    throw method_inapplicable_error(
        who + ": requires subordinator input (bm_var = 0, unit negative "
              "drift); the MLE information is undefined otherwise");
}

}  // namespace detail

/** Inverse-function rule: psi'(xi) = 1 / phi'(psi(xi)). */
inline double psi_prime(const LevyExponentModel& m, double xi) {
  return 1.0 / phi(m, psi(m, xi), 1);
}

// ---------------------------------------------------------------------------
// Jacobian entries and the estimating-equation variance
// ---------------------------------------------------------------------------

/** Partial derivatives of the limiting estimating equation J. */
struct PartialJ {
  double dj_psi = 0.0;  ///< d/dpsi of J at (psi(xi), phi(alpha))
  double dj_phi = 0.0;  ///< d/dphi of J at (psi(xi), phi(alpha))
};

/**
 * Jacobian entries of J(psi, z) at the truth:
 *
 *   dJ_psi = -alpha phi'(0) phi'(psi(xi)) / (xi (xi - phi(alpha)))
 *   dJ_phi = -alpha phi'(0) / (phi(alpha) (xi - phi(alpha)))
 *
 * As alpha -> 0+, dJ_psi -> 0 at rate O(alpha) while dJ_phi -> -1/xi
 * (phi(alpha) ~ phi'(0) alpha cancels the numerator's alpha).
 */
inline PartialJ partial_J(const LevyExponentModel& model, double xi,
                          double alpha) {
  detail::check_alpha_point(model, xi, alpha, "partial_J");
  const double drift0 = phi(model, 0.0, 1);  // = -E X(1) > 0
  const double pa = phi(model, alpha);
  const double psix = psi(model, xi);
  PartialJ out;
  out.dj_psi = -alpha * drift0 * phi(model, psix, 1) / (xi * (xi - pa));
  out.dj_phi = -alpha * drift0 / (pa * (xi - pa));
  return out;
}

/**
 * Asymptotic variance sigma_alpha^2 of sqrt(n) J_n(psi(xi), phi(alpha)):
 *
 *   sigma_alpha^2 = (2 xi^2 alpha phi'(0) / (xi - phi(alpha))^2) *
 *     [ (phi(alpha)^2/xi^2 - 2 phi(alpha)/xi)/phi(2 alpha)
 *       - alpha/(psi phi(2 psi)) + (alpha + psi)/(psi phi(alpha + psi)) ]
 *
 * with psi = psi(xi).  Strictly positive for alpha > 0 and O(alpha) as
 * alpha -> 0+.
 */
inline double sigma_alpha_sq(const LevyExponentModel& model, double xi,
                             double alpha) {
  detail::check_alpha_point(model, xi, alpha, "sigma_alpha_sq");
  const double drift0 = phi(model, 0.0, 1);
  const double pa = phi(model, alpha);
  const double p = psi(model, xi);
  const double bracket = (pa * pa / (xi * xi) - 2.0 * pa / xi) /
                             phi(model, 2.0 * alpha) -
                         alpha / (p * phi(model, 2.0 * p)) +
                         (alpha + p) / (p * phi(model, alpha + p));
  const double diff = xi - pa;
  return 2.0 * xi * xi * alpha * drift0 / (diff * diff) * bracket;
}

// ---------------------------------------------------------------------------
// MLE information and cross terms
// ---------------------------------------------------------------------------

/**
 * Fisher information per probe for psi from the (Y_i, V_i) pairs:
 *
 *   I_xi = E[ (xi/psi) e^{-psi V} (1/psi + V)^2 / (1 - (xi/psi) e^{-psi V}) ]
 *
 * Requires subordinator input (the zero-set likelihood is degenerate
 * otherwise) and a backend able to evaluate pathwise expectations.
 */
inline double I_xi(const StationaryExpectationBackend& backend,
                   const LevyExponentModel& model, double xi) {
  model.validate();
  if (!model.is_stable()) throw stability_error("I_xi: model is not stable");
  if (!(xi > 0.0) || !std::isfinite(xi))
    throw input_error("I_xi: xi must be a positive finite real");
  detail::require_subordinator(model, "I_xi");
  backend.check_model(model, "I_xi");
  const double p = psi(model, xi);
  return backend.expect([xi, p](double v) {
    const double q = (xi / p) * std::exp(-p * v);
    const double g = 1.0 / p + v;
    return q * g * g / (1.0 - q);
  });
}

/** MLE asymptotic variance sigma_xi^2 = 1 / I_xi. */
inline double sigma_xi_sq(const StationaryExpectationBackend& backend,
                          const LevyExponentModel& model, double xi) {
  return 1.0 / I_xi(backend, model, xi);
}

/**
 * Cross covariance between the estimating equation at alpha and the MLE score:
 *
 *   sigma_alpha_psi^2 = (xi^2 / (psi (xi - phi(alpha)) I_xi)) *
 *     E[ ((1/psi + V) e^{-psi V} / (1 - (xi/psi) e^{-psi V})) *
 *        (e^{-alpha V} - (alpha/psi) e^{-psi V} - (xi - phi(alpha))/xi) ]
 *
 * Sign unrestricted; O(alpha) as alpha -> 0+.
 */
inline double sigma_alpha_psi_sq(const StationaryExpectationBackend& backend,
                                 const LevyExponentModel& model, double xi,
                                 double alpha) {
  detail::check_alpha_point(model, xi, alpha, "sigma_alpha_psi_sq");
  detail::require_subordinator(model, "sigma_alpha_psi_sq");
  backend.check_model(model, "sigma_alpha_psi_sq");
  const double p = psi(model, xi);
  const double pa = phi(model, alpha);
  const double info = I_xi(backend, model, xi);
  const double expectation = backend.expect([xi, p, alpha, pa](double v) {
    const double e_psi = std::exp(-p * v);
    const double weight =
        (1.0 / p + v) * e_psi / (1.0 - (xi / p) * e_psi);
    const double centered =
        std::exp(-alpha * v) - (alpha / p) * e_psi - (xi - pa) / xi;
    return weight * centered;
  });
  return xi * xi / (p * (xi - pa) * info) * expectation;
}

/**
 * Delta-method variance of sqrt(n)(phi_hat_n(alpha) - phi(alpha)) when psi is
 * estimated by MLE:
 *
 *   sigma_alpha_xi^2 = (sigma_alpha^2 + 2 dJ_psi sigma_alpha_psi^2
 *                       + dJ_psi^2 sigma_xi^2) / dJ_phi^2
 */
inline double sigma_alpha_xi_sq(const LevyExponentModel& model, double xi,
                                double alpha,
                                const StationaryExpectationBackend& backend) {
  const PartialJ j = partial_J(model, xi, alpha);
  const double sa = sigma_alpha_sq(model, xi, alpha);
  const double sap = sigma_alpha_psi_sq(backend, model, xi, alpha);
  const double sxi = sigma_xi_sq(backend, model, xi);
  return (sa + 2.0 * j.dj_psi * sap + j.dj_psi * j.dj_psi * sxi) /
         (j.dj_phi * j.dj_phi);
}

// ---------------------------------------------------------------------------
// Pairwise covariances and the covariance matrix
// ---------------------------------------------------------------------------

/**
 * Limiting covariance of the estimating equations at two transform points:
 *
 *   sigma_{J,alpha,beta}^2 =
 *     (alpha+beta) phi'(0) / phi(alpha+beta)
 *     - (xi^2 phi'(0) / ((xi - phi(alpha))(xi - phi(beta)))) *
 *       [ (alpha+beta)/phi(alpha+beta) + 2 alpha beta/(psi phi(2 psi))
 *         - beta (alpha+psi)/(psi phi(alpha+psi))
 *         - alpha (beta+psi)/(psi phi(beta+psi)) ]
 *
 * Symmetric in (alpha, beta) — bitwise, because the arguments are
 * canonicalized before evaluation; at beta = alpha it reduces to
 * sigma_alpha^2 (up to rounding: the two closed forms differ algebraically).
 */
inline double sigma_J_alpha_beta_sq(const LevyExponentModel& model, double xi,
                                    double alpha, double beta) {
  if (beta > alpha) std::swap(alpha, beta);
  detail::check_alpha_point(model, xi, alpha, "sigma_J_alpha_beta_sq");
  detail::check_alpha_point(model, xi, beta, "sigma_J_alpha_beta_sq");
  const double drift0 = phi(model, 0.0, 1);
  const double pa = phi(model, alpha);
  const double pb = phi(model, beta);
  const double p = psi(model, xi);
  const double sum_term = (alpha + beta) / phi(model, alpha + beta);
  const double bracket = sum_term +
                         2.0 * alpha * beta / (p * phi(model, 2.0 * p)) -
                         beta * (alpha + p) / (p * phi(model, alpha + p)) -
                         alpha * (beta + p) / (p * phi(model, beta + p));
  return sum_term * drift0 -
         xi * xi * drift0 / ((xi - pa) * (xi - pb)) * bracket;
}

/**
 * Limiting covariance of sqrt(n)(phi_hat(alpha) - phi(alpha)) and
 * sqrt(n)(phi_hat(beta) - phi(beta)) under the MLE route:
 *
 *   sigma_{alpha,beta}^2 = (sigma_{J,alpha,beta}^2
 *       + dJ_psi(beta) sigma_alpha_psi^2 + dJ_psi(alpha) sigma_beta_psi^2
 *       + dJ_psi(alpha) dJ_psi(beta) sigma_xi^2)
 *     / (dJ_phi(alpha) dJ_phi(beta))
 *
 * Bitwise symmetric: arguments are canonicalized before evaluation.
 */
inline double sigma_alpha_beta_sq(const LevyExponentModel& model, double xi,
                                  double alpha, double beta,
                                  const StationaryExpectationBackend& backend) {
  if (alpha == beta) return sigma_alpha_xi_sq(model, xi, alpha, backend);
  if (beta > alpha) std::swap(alpha, beta);
  const PartialJ ja = partial_J(model, xi, alpha);
  const PartialJ jb = partial_J(model, xi, beta);
  const double sj = sigma_J_alpha_beta_sq(model, xi, alpha, beta);
  const double sap = sigma_alpha_psi_sq(backend, model, xi, alpha);
  const double sbp = sigma_alpha_psi_sq(backend, model, xi, beta);
  const double sxi = sigma_xi_sq(backend, model, xi);
  return (sj + jb.dj_psi * sap + ja.dj_psi * sbp +
          ja.dj_psi * jb.dj_psi * sxi) /
         (ja.dj_phi * jb.dj_phi);
}

/**
 * Full covariance matrix Sigma over an alpha grid: diagonal entries
 * sigma_{alpha_i,xi}^2, off-diagonal sigma_{alpha_i,alpha_j}^2.  Exactly
 * symmetric by construction (each upper entry is mirrored).  A grid point
 * inside the singularity guard raises a singularity_error naming it.
 */
inline Matrix covariance_matrix(const LevyExponentModel& model, double xi,
                                const std::vector<double>& alphas,
                                const StationaryExpectationBackend& backend) {
  if (alphas.empty())
    throw input_error("covariance_matrix: alpha grid is empty");
  const std::size_t p = alphas.size();

  // Precompute the per-alpha ingredients once; O(p) expectations + O(p^2)
  // closed-form assembly.
  std::vector<PartialJ> js(p);
  std::vector<double> sap(p);
  for (std::size_t i = 0; i < p; ++i) {
    js[i] = partial_J(model, xi, alphas[i]);
    sap[i] = sigma_alpha_psi_sq(backend, model, xi, alphas[i]);
  }
  const double sxi = sigma_xi_sq(backend, model, xi);

  Matrix sigma(p, p);
  for (std::size_t i = 0; i < p; ++i) {
    const double sa = sigma_alpha_sq(model, xi, alphas[i]);
    sigma.at(i, i) = (sa + 2.0 * js[i].dj_psi * sap[i] +
                      js[i].dj_psi * js[i].dj_psi * sxi) /
                     (js[i].dj_phi * js[i].dj_phi);
    for (std::size_t j = i + 1; j < p; ++j) {
      // Same canonical (larger alpha first) evaluation order as
      // sigma_alpha_beta_sq, so matrix entries equal direct calls bitwise.
      const std::size_t hi = (alphas[j] > alphas[i]) ? j : i;
      const std::size_t lo = (alphas[j] > alphas[i]) ? i : j;
      const double sj = sigma_J_alpha_beta_sq(model, xi, alphas[hi], alphas[lo]);
      const double value =
          (sj + js[lo].dj_psi * sap[hi] + js[hi].dj_psi * sap[lo] +
           js[hi].dj_psi * js[lo].dj_psi * sxi) /
          (js[hi].dj_phi * js[lo].dj_phi);
      sigma.at(i, j) = value;
      sigma.at(j, i) = value;
    }
  }
  return sigma;
}

/**
 * Asymptotic correlation r(alpha, beta) = sigma_{alpha,beta}^2 /
 * sqrt(sigma_{alpha,xi}^2 sigma_{beta,xi}^2); exactly 1 when alpha == beta.
 */
inline double correlation(const LevyExponentModel& model, double xi,
                          double alpha, double beta,
                          const StationaryExpectationBackend& backend) {
  if (alpha == beta) {
    detail::check_alpha_point(model, xi, alpha, "correlation");
    return 1.0;
  }
  const double cov = sigma_alpha_beta_sq(model, xi, alpha, beta, backend);
  const double va = sigma_alpha_xi_sq(model, xi, alpha, backend);
  const double vb = sigma_alpha_xi_sq(model, xi, beta, backend);
  return cov / std::sqrt(va * vb);
}

// ---------------------------------------------------------------------------
// Threshold-estimator limit and expected sample size
// ---------------------------------------------------------------------------

/** Limit of the threshold estimator together with its asymptotic bias. */
struct ThetaTau {
  double theta_tau = 0.0;  ///< a.s. limit of theta_hat_m(tau)
  double bias = 0.0;       ///< theta_tau + phi'(0), in (0, xi/psi(xi)]
};

/**
 * theta(tau) = xi E[e^{-psi V} 1(V >= tau)] / (psi P(V >= tau)) - phi'(0)
 * under the stationary law; bias = theta(tau) + phi'(0).  At tau = 0 the
 * indicator is identically one and the bias collapses to (xi/psi) E e^{-psi V}.
 * PLUGIN backend with no observation above tau: insufficient_data_error.
 */
inline ThetaTau theta_tau_asymptotic(const LevyExponentModel& model, double xi,
                                     double tau,
                                     const StationaryExpectationBackend& backend) {
  model.validate();
  if (!model.is_stable())
    throw stability_error("theta_tau_asymptotic: model is not stable");
  if (!(xi > 0.0) || !std::isfinite(xi))
    throw input_error("theta_tau_asymptotic: xi must be positive");
  if (tau < 0.0)
    throw input_error("theta_tau_asymptotic: tau must be >= 0");
  backend.check_model(model, "theta_tau_asymptotic");
  const double p = psi(model, xi);
  const double drift0 = phi(model, 0.0, 1);
  const double num = backend.tail_lst(p, tau);
  const double den = backend.tail_prob(tau);
  if (den <= 0.0)
    throw insufficient_data_error(
        "theta_tau_asymptotic: no sample mass at or above tau = " + fmt17(tau),
        0);
  ThetaTau out;
  out.theta_tau = xi * num / (p * den) - drift0;
  out.bias = out.theta_tau + drift0;
  return out;
}

/**
 * Rough expected-sample-size approximation E M(m, tau) ~= m e^{omega tau},
 * where omega is the Cramer root phi(-omega) = 0.  Documented as an
 * approximation: no tolerance contract.  Models without a Cramer root (e.g.
 * pure drift) raise method_inapplicable_error.
 */
inline double expected_sample_size(const LevyExponentModel& model, double m,
                                   double tau) {
  model.validate();
  if (!(m > 0.0)) throw input_error("expected_sample_size: m must be > 0");
  if (tau < 0.0) throw input_error("expected_sample_size: tau must be >= 0");
  const auto omega = cramer_root(model);
  if (!omega)
    throw method_inapplicable_error(
        "expected_sample_size: approximation unavailable, the model has no "
        "Cramer root");
  return m * std::exp(*omega * tau);
}

// ---------------------------------------------------------------------------
// Joint transform limit
// ---------------------------------------------------------------------------

/**
 * lim_n E e^{-alpha V_i - beta V_{i-1}} under stationarity:
 *
 *   (xi phi'(0) / (xi - phi(alpha))) *
 *     ((alpha+beta)/phi(alpha+beta) - alpha (psi+beta)/(psi phi(psi+beta)))
 *
 * Collapses to the stationary LST of either argument as the other tends to 0.
 */
inline double joint_lst_limit(const LevyExponentModel& model, double xi,
                              double alpha, double beta) {
  detail::check_alpha_point(model, xi, alpha, "joint_lst_limit");
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw input_error("joint_lst_limit: beta must be a positive finite real");
  const double drift0 = phi(model, 0.0, 1);
  const double p = psi(model, xi);
  return xi * drift0 / (xi - phi(model, alpha)) *
         ((alpha + beta) / phi(model, alpha + beta) -
          alpha * (p + beta) / (p * phi(model, p + beta)));
}

// ---------------------------------------------------------------------------
// Normal quantile and the asymptotic report
// ---------------------------------------------------------------------------

/**
 * Standard normal quantile by bisection on 0.5(1 + erf(z/sqrt 2)) = p over
 * [-10, 10]; plenty for confidence levels (|z| < 6.4 at p = 1e-10).
 */
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw input_error("normal_quantile: p must lie in (0, 1)");
  double lo = -10.0, hi = 10.0;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 * (1.0 + std::erf(mid * inv_sqrt2));
    (cdf < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/**
 * Per-alpha asymptotic constants over a grid, plus the covariance matrix and
 * normal-approximation confidence half-widths z_{1-delta/2} sqrt(v/n).
 *
 * The MLE-route constants (sigma_alpha_psi_sq, sigma_alpha_xi_sq, the CI
 * half-widths, sigma_xi_sq, covariance) exist only when `method` is
 * PsiMethod-like "mle"; for the threshold route the asymptotic theory is an
 * open question, so those fields are left empty rather than guessed.
 */
struct AsymptoticReport {
  std::vector<double> alphas;
  std::vector<double> phi_true;
  std::vector<double> sigma_alpha_sq;
  std::vector<double> dj_psi;
  std::vector<double> dj_phi;
  std::vector<double> sigma_alpha_psi_sq;  ///< empty for the threshold route
  std::vector<double> sigma_alpha_xi_sq;   ///< empty for the threshold route
  std::vector<double> ci_half_width;       ///< empty for the threshold route
  double sigma_xi_sq = std::numeric_limits<double>::quiet_NaN();
  Matrix covariance;  ///< empty (0x0) for the threshold route
  double delta = 0.05;
  std::size_t n = 0;
  bool mle_route = true;
};

inline AsymptoticReport build_asymptotic_report(
    const LevyExponentModel& model, double xi, const std::vector<double>& alphas,
    const StationaryExpectationBackend& backend, std::size_t n,
    double delta = 0.05, bool mle_route = true) {
  if (alphas.empty())
    throw input_error("build_asymptotic_report: alpha grid is empty");
  if (n == 0)
    throw input_error("build_asymptotic_report: n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0))
    throw input_error("build_asymptotic_report: delta must lie in (0, 1)");

  AsymptoticReport rep;
  rep.alphas = alphas;
  rep.delta = delta;
  rep.n = n;
  rep.mle_route = mle_route;
  for (double a : alphas) {
    const PartialJ j = partial_J(model, xi, a);
    rep.phi_true.push_back(phi(model, a));
    rep.sigma_alpha_sq.push_back(sigma_alpha_sq(model, xi, a));
    rep.dj_psi.push_back(j.dj_psi);
    rep.dj_phi.push_back(j.dj_phi);
  }
  if (mle_route) {
    const double z = normal_quantile(1.0 - delta / 2.0);
    rep.sigma_xi_sq = sigma_xi_sq(backend, model, xi);
    rep.covariance = covariance_matrix(model, xi, alphas, backend);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      rep.sigma_alpha_psi_sq.push_back(
          sigma_alpha_psi_sq(backend, model, xi, alphas[i]));
      const double v = rep.covariance.at(i, i);
      rep.sigma_alpha_xi_sq.push_back(v);
      rep.ci_half_width.push_back(z * std::sqrt(v / static_cast<double>(n)));
    }
  }
  return rep;
}

/**
 * CSV serialization: header
 * `alpha,phi_true,sigma_alpha_sq,dJ_psi,dJ_phi,sigma_alpha_psi_sq,sigma_alpha_xi_sq`
 * and one row per alpha.  Threshold-route reports leave the last two cells
 * empty.
 */
inline std::string report_csv(const AsymptoticReport& rep) {
  std::string out =
      "alpha,phi_true,sigma_alpha_sq,dJ_psi,dJ_phi,sigma_alpha_psi_sq,"
      "sigma_alpha_xi_sq\n";
  for (std::size_t i = 0; i < rep.alphas.size(); ++i) {
    std::vector<std::string> cells = {
        fmt17(rep.alphas[i]),   fmt17(rep.phi_true[i]),
        fmt17(rep.sigma_alpha_sq[i]), fmt17(rep.dj_psi[i]),
        fmt17(rep.dj_phi[i])};
    if (rep.mle_route) {
      cells.push_back(fmt17(rep.sigma_alpha_psi_sq[i]));
      cells.push_back(fmt17(rep.sigma_alpha_xi_sq[i]));
    } else {
      cells.push_back("");
      cells.push_back("");
    }
    out += csv_row(cells);
  }
  return out;
}

/** Square-matrix CSV (no header): one row per line, %.17g cells. */
inline std::string matrix_csv(const Matrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.rows; ++i) {
    std::vector<double> row(m.cols);
    for (std::size_t j = 0; j < m.cols; ++j) row[j] = m.at(i, j);
    out += csv_row(row);
  }
  return out;
}

}  // namespace levyq

#endif  // LEVYQ_ASYMPTOTICS_HPP
