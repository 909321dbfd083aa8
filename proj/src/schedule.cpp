#include "retimbre/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace retimbre {

NoiseSchedule make_schedule(int steps, double sigma_min, double sigma_max,
                            double rho) {
  if (steps < 1) throw std::invalid_argument("schedule needs at least 1 step");
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min))
    throw std::invalid_argument("schedule needs 0 < sigma_min < sigma_max");

  NoiseSchedule s;
  s.sigmas.resize(static_cast<std::size_t>(steps) + 1);
  const double inv_rho = 1.0 / rho;
  const double lo = std::pow(sigma_min, inv_rho);
  const double hi = std::pow(sigma_max, inv_rho);
  for (int t = 0; t <= steps; ++t) {
    const double u = 1.0 - static_cast<double>(t) / static_cast<double>(steps);
    s.sigmas[static_cast<std::size_t>(t)] = std::pow(hi + u * (lo - hi), rho);
  }
  // Force exact endpoints; pow round-trips can drift in the last ulp.
  s.sigmas.front() = sigma_min;
  s.sigmas.back() = sigma_max;
  return s;
}

double alpha_for_sigma(double sigma) { return 1.0 / (1.0 + sigma * sigma); }

int step_for_fraction(const NoiseSchedule& schedule, double fraction) {
  const double target = fraction * schedule.sigma_max();
  int best = 0;
  double best_err = std::abs(schedule.sigma(0) - target);
  for (int t = 1; t <= schedule.steps(); ++t) {
    const double err = std::abs(schedule.sigma(t) - target);
    if (err <= best_err) {  // ties go to the larger index
      best_err = err;
      best = t;
    }
  }
  return best;
}

}  // namespace retimbre
