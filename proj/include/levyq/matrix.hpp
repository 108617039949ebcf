#ifndef LEVYQ_MATRIX_HPP
#define LEVYQ_MATRIX_HPP

/**
 * @file matrix.hpp
 * @brief Minimal dense matrix used for the estimator covariance Sigma.
 */

#include <cmath>
#include <cstddef>
#include <vector>

#include "levyq/errors.hpp"

namespace levyq {

/** Row-major dense matrix of doubles; just enough for covariance bookkeeping. */
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  /** Max |A - A^T| entry; 0 for an exactly symmetric matrix. */
  double asymmetry() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = i + 1; j < cols; ++j)
        worst = std::max(worst, std::abs(at(i, j) - at(j, i)));
    return worst;
  }

  /**
   * Positive-semidefiniteness check via Cholesky with a small tolerance shift;
   * adequate for the low-dimensional covariance matrices produced here.
   */
  bool positive_semidefinite(double tol = 1e-10) const {
    if (rows != cols) return false;
    Matrix chol(*this);
    const std::size_t n = rows;
    for (std::size_t j = 0; j < n; ++j) {
      double d = chol.at(j, j) + tol;
      for (std::size_t k = 0; k < j; ++k) d -= chol.at(j, k) * chol.at(j, k);
      if (d < 0.0) return false;
      const double root = std::sqrt(d);
      chol.at(j, j) = root;
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = chol.at(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= chol.at(i, k) * chol.at(j, k);
        chol.at(i, j) = (root > 0.0) ? s / root : 0.0;
      }
    }
    return true;
  }
};

}  // namespace levyq

#endif  // LEVYQ_MATRIX_HPP
