#ifndef LEVYQ_TESTS_TEST_MODELS_HPP
#define LEVYQ_TESTS_TEST_MODELS_HPP

/** Reference models shared across the test suite. */

#include "levyq/exponent.hpp"

namespace levyq_tests {

/** M/M/1 input: Poisson(lambda) arrivals, Exp(mu) jobs, unit drain. */
inline levyq::LevyExponentModel mm1_model(double lambda = 0.8, double mu = 1.0) {
  levyq::LevyExponentModel m;
  m.cp_rate = lambda;
  m.cp_shape = 1.0;
  m.cp_rate_param = mu;
  m.bm_drift = -1.0;
  return m;
}

/**
 * Three-component reference model with
 * (lambda, eta, mu, d, sigma^2, beta, gamma) = (0.2, 1.2, 0.5, -1, 0.1, 1, 5),
 * so E X(1) = -0.32 and phi'(0) = 0.32.
 */
inline levyq::LevyExponentModel three_component_model() {
  levyq::LevyExponentModel m;
  m.cp_rate = 0.2;
  m.cp_shape = 1.2;
  m.cp_rate_param = 0.5;
  m.bm_drift = -1.0;
  m.bm_var = 0.1;
  m.gamma_shape = 1.0;
  m.gamma_rate = 5.0;
  return m;
}

/** Reflected Brownian input with drift d and variance sigma^2. */
inline levyq::LevyExponentModel brownian_model(double drift = -0.3, double var = 1.0) {
  levyq::LevyExponentModel m;
  m.bm_drift = drift;
  m.bm_var = var;
  return m;
}

/** Pure deterministic drain (no stochastic component). */
inline levyq::LevyExponentModel pure_drift_model(double drift = -1.0) {
  levyq::LevyExponentModel m;
  m.bm_drift = drift;
  return m;
}

}  // namespace levyq_tests

#endif  // LEVYQ_TESTS_TEST_MODELS_HPP
