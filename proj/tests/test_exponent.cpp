#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "levyq/exponent.hpp"
#include "levyq/rng.hpp"

#include "test_models.hpp"

using levyq::LevyExponentModel;
using levyq::Mm1Oracle;

namespace {

using levyq_tests::mm1_model;
using levyq_tests::three_component_model;

/** Random stable model: all three components active with random weights. */
LevyExponentModel random_stable_model(levyq::rng_stream& rng) {
  LevyExponentModel m;
  m.cp_rate = 2.0 * rng.uniform();
  m.cp_shape = 0.3 + 2.7 * rng.uniform();
  m.cp_rate_param = 0.3 + 2.7 * rng.uniform();
  m.bm_var = (rng.uniform() < 0.5) ? rng.uniform() : 0.0;
  m.gamma_shape = (rng.uniform() < 0.5) ? 2.0 * rng.uniform() : 0.0;
  m.gamma_rate = 0.3 + 4.7 * rng.uniform();
  const double positive_part =
      (m.cp_rate > 0.0 ? m.cp_rate * m.cp_shape / m.cp_rate_param : 0.0) +
      (m.gamma_shape > 0.0 ? m.gamma_shape / m.gamma_rate : 0.0);
  m.bm_drift = -positive_part - (0.05 + 0.95 * rng.uniform());
  return m;
}

}  // namespace

TEST_CASE("phi closed-form values", "[exponent]") {
  const auto mm1 = mm1_model();
  CHECK(levyq::phi(mm1, 1.0) == Catch::Approx(0.6).epsilon(1e-14));
  CHECK(levyq::phi(mm1, 0.0) == 0.0);
  CHECK(levyq::phi(three_component_model(), 0.0) == 0.0);
  // phi'(0) = -E X(1) = -(0.2*1.2/0.5 - 1 + 1/5) = 0.32 for the three-component model.
  CHECK(levyq::phi(three_component_model(), 0.0, 1) == Catch::Approx(0.32).epsilon(1e-14));
  CHECK(three_component_model().mean_input() == Catch::Approx(-0.32).epsilon(1e-14));
  // phi''(0) = sigma^2 + lambda eta (eta+1)/mu^2 + beta/gamma^2.
  CHECK(levyq::phi(three_component_model(), 0.0, 2) ==
        Catch::Approx(0.1 + 0.2 * 1.2 * 2.2 / 0.25 + 1.0 / 25.0).epsilon(1e-14));
  CHECK(levyq::phi(mm1, 0.0, 2) == Catch::Approx(1.6).epsilon(1e-14));
}

TEST_CASE("model validation and flags", "[exponent]") {
  LevyExponentModel bad = mm1_model();
  bad.cp_rate_param = 0.0;
  CHECK_THROWS_AS(levyq::phi(bad, 1.0), levyq::invalid_model_error);

  LevyExponentModel bad2 = three_component_model();
  bad2.gamma_rate = -1.0;
  CHECK_THROWS_AS(levyq::phi(bad2, 1.0), levyq::invalid_model_error);

  CHECK(mm1_model().is_subordinator());
  CHECK(!three_component_model().is_subordinator());  // Brownian component present
  CHECK(mm1_model().is_stable());
  LevyExponentModel unstable = mm1_model(1.2, 1.0);
  CHECK(!unstable.is_stable());
  CHECK_THROWS_AS(levyq::psi(unstable, 1.0), levyq::stability_error);
}

TEST_CASE("psi inversion: closed form and round trips", "[exponent]") {
  const Mm1Oracle oracle{0.8, 1.0};
  CHECK(levyq::psi(mm1_model(), 1.0) == Catch::Approx(1.477033).margin(1e-5));
  CHECK(levyq::psi(mm1_model(), 1.0) == Catch::Approx(oracle.psi(1.0)).epsilon(1e-12));

  levyq::rng_stream rng(20260819, 1);
  for (int k = 0; k < 50; ++k) {
    const auto m = random_stable_model(rng);
    for (double xi : {0.1, 1.0, 5.0}) {
      const double root = levyq::psi(m, xi);
      CHECK(std::abs(levyq::phi(m, root) - xi) <= 1e-9);
    }
  }
}

TEST_CASE("phi derivatives match central finite differences", "[exponent]") {
  levyq::rng_stream rng(20260819, 2);
  for (int k = 0; k < 20; ++k) {
    const auto m = random_stable_model(rng);
    for (double alpha : {0.5, 1.0, 5.0}) {
      const double h = 1e-6 * std::max(1.0, alpha);
      const double fd1 = (levyq::phi(m, alpha + h) - levyq::phi(m, alpha - h)) / (2.0 * h);
      CHECK(levyq::phi(m, alpha, 1) == Catch::Approx(fd1).epsilon(1e-6));
      // Second derivative: central difference of the analytic phi'. A second
      // difference of phi itself cannot reach 1e-6 relative accuracy in
      // doubles when phi'' << phi (cancellation ~ eps/h^2).
      const double h2 = 1e-5 * std::max(1.0, alpha);
      const double fd2 =
          (levyq::phi(m, alpha + h2, 1) - levyq::phi(m, alpha - h2, 1)) / (2.0 * h2);
      CHECK(levyq::phi(m, alpha, 2) == Catch::Approx(fd2).epsilon(1e-6));
    }
  }
}

TEST_CASE("phi is strictly increasing and convex under stability", "[exponent]") {
  levyq::rng_stream rng(20260819, 3);
  for (int k = 0; k < 20; ++k) {
    const auto m = random_stable_model(rng);
    double prev = 0.0;
    for (double a = 0.25; a <= 8.0; a += 0.25) {
      const double cur = levyq::phi(m, a);
      CHECK(cur > prev);
      prev = cur;
    }
    for (double a = 0.0; a <= 6.0; a += 0.5) {
      const double b = a + 2.0;
      const double mid = levyq::phi(m, 0.5 * (a + b));
      CHECK(mid <= 0.5 * (levyq::phi(m, a) + levyq::phi(m, b)) + 1e-12);
    }
  }
}

TEST_CASE("stationary LST: GPK values and monotonicity", "[exponent]") {
  const auto mm1 = mm1_model();
  CHECK(levyq::stationary_lst(mm1, 1.0) == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(levyq::stationary_lst(mm1, 1e-9) == Catch::Approx(1.0).margin(1e-8));
  CHECK(levyq::stationary_lst(mm1, 0.0) == 1.0);

  const Mm1Oracle oracle{0.8, 1.0};
  CHECK(oracle.stationary_lst(1.0) == Catch::Approx(1.0 / 3.0).epsilon(1e-14));

  double prev = 1.0;
  for (double b = 0.1; b <= 20.0; b += 0.1) {
    const double cur = levyq::stationary_lst(three_component_model(), b);
    CHECK(cur < prev);
    CHECK(cur > 0.0);
    prev = cur;
  }

  LevyExponentModel unstable = mm1_model(1.2, 1.0);
  CHECK_THROWS_AS(levyq::stationary_lst(unstable, 1.0), levyq::stability_error);
}

TEST_CASE("Mm1Oracle agrees with the generic model to 1e-12", "[exponent]") {
  const Mm1Oracle oracle{0.8, 1.0};
  const auto model = oracle.to_model();
  for (double a = 0.0; a <= 50.0; a += 0.5) {
    CHECK(std::abs(oracle.phi(a) - levyq::phi(model, a)) <= 1e-12 * std::max(1.0, oracle.phi(a)));
    CHECK(oracle.phi_deriv(a) == Catch::Approx(levyq::phi(model, a, 1)).epsilon(1e-12));
    // The mixture LST must equal the GPK formula exactly as well.
    if (a > 0.0)
      CHECK(oracle.stationary_lst(a) ==
            Catch::Approx(levyq::stationary_lst(model, a)).epsilon(1e-12));
  }
  // Quadrature backend vs closed form: E e^{-V} through the mixture integral.
  const double by_quadrature =
      oracle.expectation([](double v) { return std::exp(-v); });
  CHECK(by_quadrature == Catch::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("cramer root: closed form, absence and the three-component model", "[exponent]") {
  const auto mm1 = mm1_model();
  auto root = levyq::cramer_root(mm1);
  REQUIRE(root.has_value());
  CHECK(*root == Catch::Approx(0.2).epsilon(1e-9));

  LevyExponentModel drift;  // lambda = beta = sigma^2 = 0, d = -1
  drift.cp_rate = 0.0;
  drift.bm_drift = -1.0;
  CHECK(!levyq::cramer_root(drift).has_value());

  const auto tc = three_component_model();
  auto root6 = levyq::cramer_root(tc);
  REQUIRE(root6.has_value());
  CHECK(std::abs(levyq::phi(tc, -*root6)) <= 1e-10);
  CHECK(*root6 == Catch::Approx(0.180079603250879).epsilon(1e-9));
  CHECK(*root6 < std::min(tc.cp_rate_param, tc.gamma_rate));

  // Pure Brownian input with negative drift: root at -2 d / sigma^2.
  LevyExponentModel brownian;
  brownian.cp_rate = 0.0;
  brownian.bm_drift = -0.3;
  brownian.bm_var = 1.0;
  auto rootb = levyq::cramer_root(brownian);
  REQUIRE(rootb.has_value());
  CHECK(*rootb == Catch::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("psi respects psi >= xi for subordinator-input models", "[exponent]") {
  // With unit output (d = -1) and subordinator input, X(1) >= -1 a.s., so
  // phi(alpha) <= alpha and therefore psi(xi) >= xi.
  levyq::rng_stream rng(20260819, 4);
  for (int k = 0; k < 20; ++k) {
    LevyExponentModel m;
    m.bm_drift = -1.0;
    m.bm_var = 0.0;
    m.cp_shape = 0.3 + 2.7 * rng.uniform();
    m.cp_rate_param = 0.3 + 2.7 * rng.uniform();
    m.gamma_rate = 0.3 + 4.7 * rng.uniform();
    // Split a total input rate below 1 between the two subordinator parts.
    const double total = 0.05 + 0.9 * rng.uniform();
    const double split = rng.uniform();
    m.cp_rate = total * split * m.cp_rate_param / m.cp_shape;
    m.gamma_shape = total * (1.0 - split) * m.gamma_rate;
    REQUIRE(m.is_stable());
    REQUIRE(m.is_subordinator());
    for (double xi : {0.1, 1.0, 5.0})
      CHECK(levyq::psi(m, xi) >= xi * (1.0 - 1e-12));
  }
}
