#pragma once

#include <vector>

namespace retimbre {

// Noise levels sigma_0 < sigma_1 < ... < sigma_N laid out on the standard
// rho-warped grid.  Index t counts refinement steps remaining when sampling
// from sigma_t down to clean data, so t = N is the fully-noised end.
struct NoiseSchedule {
  std::vector<double> sigmas;

  int steps() const { return static_cast<int>(sigmas.size()) - 1; }
  double sigma(int t) const { return sigmas[static_cast<std::size_t>(t)]; }
  double sigma_min() const { return sigmas.front(); }
  double sigma_max() const { return sigmas.back(); }
};

NoiseSchedule make_schedule(int steps = 30, double sigma_min = 0.002,
                            double sigma_max = 80.0, double rho = 7.0);

// Variance-preserving scale paired with sigma: alpha * (1 + sigma^2) == 1.
double alpha_for_sigma(double sigma);

// Grid index whose sigma is closest to fraction * sigma_max; ties resolve
// toward the noisier (larger) index.
int step_for_fraction(const NoiseSchedule& schedule, double fraction);

}  // namespace retimbre
