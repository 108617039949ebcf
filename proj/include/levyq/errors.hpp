#ifndef LEVYQ_ERRORS_HPP
#define LEVYQ_ERRORS_HPP

/**
 * @file errors.hpp
 * @brief Exception taxonomy shared by all levyq modules.
 *
 * Two families matter to callers (and map to CLI exit codes):
 *   - configuration/input problems (bad parameters, malformed files)  -> exit 2
 *   - numeric/method failures (non-convergence, inapplicable method)  -> exit 3
 */

#include <cstddef>
#include <stdexcept>
#include <string>

namespace levyq {

/** Base class of every levyq exception. */
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/** Invalid user-facing configuration (CLI flags, config files, scenario names). */
class config_error : public error {
 public:
  explicit config_error(const std::string& what) : error(what) {}
};

/** Structurally invalid inputs to library calls (empty samples, bad grids). */
class input_error : public error {
 public:
  explicit input_error(const std::string& what) : error(what) {}
};

/** Model parameters outside their domain (e.g. gamma_rate <= 0 with gamma_shape > 0). */
class invalid_model_error : public error {
 public:
  explicit invalid_model_error(const std::string& what) : error(what) {}
};

/** An operation that requires a stable queue was called on an unstable model. */
class stability_error : public error {
 public:
  explicit stability_error(const std::string& what) : error(what) {}
};

/**
 * Numeric failure: iteration budget exhausted, quadrature non-convergence, ...
 * Carries the last bracket examined by a root finder when one is available.
 */
class numeric_error : public error {
 public:
  explicit numeric_error(const std::string& what,
                         double bracket_lo = 0.0, double bracket_hi = 0.0)
      : error(what), bracket_lo_(bracket_lo), bracket_hi_(bracket_hi) {}
  double bracket_lo() const noexcept { return bracket_lo_; }
  double bracket_hi() const noexcept { return bracket_hi_; }

 private:
  double bracket_lo_;
  double bracket_hi_;
};

/** Evaluation at (or too close to) a singular point, e.g. phi(alpha) = xi. */
class singularity_error : public numeric_error {
 public:
  explicit singularity_error(const std::string& what) : numeric_error(what) {}
};

/** A method was invoked on data it does not apply to (e.g. MLE without exact zeros). */
class method_inapplicable_error : public error {
 public:
  explicit method_inapplicable_error(const std::string& what) : error(what) {}
};

/** A stored sample ran out before the requested statistic could be formed. */
class insufficient_data_error : public error {
 public:
  insufficient_data_error(const std::string& what, std::size_t found)
      : error(what), found_(found) {}
  /** How many qualifying observations were present. */
  std::size_t found() const noexcept { return found_; }

 private:
  std::size_t found_;
};

/** Parametric identification failed (e.g. lambda_hat <= 0 in the CP model). */
class identification_error : public error {
 public:
  explicit identification_error(const std::string& what) : error(what) {}
};

}  // namespace levyq

#endif  // LEVYQ_ERRORS_HPP
