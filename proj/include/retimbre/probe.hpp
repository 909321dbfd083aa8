#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "retimbre/rng.hpp"
#include "retimbre/schedule.hpp"
#include "retimbre/world.hpp"

namespace retimbre {

// Replace the masked channels of every frame with those of a donor frame
// drawn uniformly among frames carrying a different instrument label.
Eigen::MatrixXd make_swapped(const Eigen::MatrixXd& frames,
                             const std::vector<int>& instruments,
                             const std::vector<bool>& mask, Rng& rng);

struct ProbeOptions {
  int n_frames = 5000;  // frames per class at each noise level
  std::vector<double> f_grid = {0.1, 0.2, 0.3, 0.4, 0.5,
                                0.6, 0.7, 0.8, 0.9, 1.0};
  double train_fraction = 0.8;
  int max_iterations = 8;  // Newton iteration cap per fit
  double l2 = 1e-3;
  double select_delta = 0.03;
  int max_parallel = 4;
  std::uint64_t seed = 7;
};

struct ProbePoint {
  double f = 0.0;
  int step = 0;
  double sigma = 0.0;
  double accuracy = 0.0;
  int n_test = 0;
};

struct ProbeResult {
  std::vector<ProbePoint> curve;  // ordered by f ascending
  double selected_f = 0.0;
  bool in_band = false;  // false: no point reached chance band, largest f used
};

// Linear probe detectability curve: at each noise fraction f, train a
// logistic classifier to tell intact frames from mask-swapped frames after
// both are noised to sigma(step_for_fraction(f)), and record held-out
// accuracy.  Features per frame: raw channels, all products of a masked
// channel with an unmasked channel, and log sigma.
ProbeResult run_probe(const World& w, const NoiseSchedule& schedule,
                      const std::vector<bool>& mask,
                      const ProbeOptions& opts = ProbeOptions());

// Smallest f whose accuracy is within delta of chance; falls back to the
// largest f (in_band = false) when none qualifies.
std::pair<double, bool> select_f_par(const std::vector<ProbePoint>& curve,
                                     double delta = 0.03);

}  // namespace retimbre
