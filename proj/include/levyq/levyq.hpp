#ifndef LEVYQ_LEVYQ_HPP
#define LEVYQ_LEVYQ_HPP

/**
 * @file levyq.hpp
 * @brief Umbrella header: the whole levyq library in one include.
 */

#include "levyq/asymptotics.hpp"
#include "levyq/config.hpp"
#include "levyq/csv.hpp"
#include "levyq/errors.hpp"
#include "levyq/estimate.hpp"
#include "levyq/exponent.hpp"
#include "levyq/harness.hpp"
#include "levyq/matrix.hpp"
#include "levyq/quadrature.hpp"
#include "levyq/rng.hpp"
#include "levyq/simulate.hpp"

#endif  // LEVYQ_LEVYQ_HPP
