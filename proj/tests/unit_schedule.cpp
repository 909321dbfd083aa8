#include <doctest.h>

#include <cmath>

#include "retimbre/schedule.hpp"

using namespace retimbre;

TEST_CASE("schedule endpoints and monotonicity") {
  const NoiseSchedule s = make_schedule();
  CHECK(s.steps() == 30);
  CHECK(s.sigma_min() == 0.002);
  CHECK(s.sigma_max() == 80.0);
  for (int t = 1; t <= s.steps(); ++t) CHECK(s.sigma(t) > s.sigma(t - 1));
}

TEST_CASE("schedule matches frozen mid-grid value") {
  const NoiseSchedule s = make_schedule();
  // Independently computed from the rho-warp formula at t = 15.
  CHECK(s.sigma(15) == doctest::Approx(2.515218976147159).epsilon(1e-14));
  CHECK(s.sigma(26) == doctest::Approx(37.091823425145961).epsilon(1e-14));
  CHECK(s.sigma(25) == doctest::Approx(30.183258054886981).epsilon(1e-14));
}

TEST_CASE("alpha pairs with sigma exactly") {
  const NoiseSchedule s = make_schedule();
  for (int t = 0; t <= s.steps(); ++t) {
    const double sig = s.sigma(t);
    CHECK(std::abs(alpha_for_sigma(sig) * (1.0 + sig * sig) - 1.0) < 1e-12);
  }
}

TEST_CASE("fraction lookup hits frozen indices") {
  const NoiseSchedule s = make_schedule();
  CHECK(step_for_fraction(s, 0.5) == 26);
  CHECK(step_for_fraction(s, 0.4) == 25);
  CHECK(step_for_fraction(s, 0.1) == 19);
  CHECK(step_for_fraction(s, 1.0) == 30);
}

TEST_CASE("fraction lookup is a nearest-sigma argmin with ties upward") {
  const NoiseSchedule s = make_schedule();
  for (int f100 = 1; f100 <= 100; ++f100) {
    const double f = f100 / 100.0;
    const int got = step_for_fraction(s, f);
    // Brute-force re-scan.
    const double target = f * s.sigma_max();
    for (int t = 0; t <= s.steps(); ++t) {
      const double err_t = std::abs(s.sigma(t) - target);
      const double err_got = std::abs(s.sigma(got) - target);
      CHECK(err_got <= err_t);
      if (err_t == err_got) CHECK(got >= t);
    }
  }
}

TEST_CASE("fraction lookup round-trips every grid sigma") {
  const NoiseSchedule s = make_schedule();
  for (int t = 0; t <= s.steps(); ++t)
    CHECK(step_for_fraction(s, s.sigma(t) / s.sigma_max()) == t);
}

TEST_CASE("schedule validates its inputs") {
  CHECK_THROWS(make_schedule(0));
  CHECK_THROWS(make_schedule(10, -1.0, 80.0));
  CHECK_THROWS(make_schedule(10, 1.0, 0.5));
}
