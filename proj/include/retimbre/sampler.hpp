#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "retimbre/schedule.hpp"
#include "retimbre/world.hpp"

namespace retimbre {

enum class StepMethod { kEuler, kHeun };

struct SampleOptions {
  double guidance_weight = 1.0;  // 1 = plain conditional; >1 extrapolates
                                 // conditional past unconditional
  StepMethod method = StepMethod::kEuler;
};

// Classifier-free-guided denoiser: blend of conditional and unconditional
// posterior means at the given weight.  cond entries may be -1 (then the
// column is plain unconditional regardless of weight).
Eigen::MatrixXd guided_denoise(const World& w, const Eigen::MatrixXd& z,
                               double sigma, const std::vector<int>& cond,
                               double weight);

// Called after every refinement step with the step index just arrived at
// (start_step-1 down to 0) and the state, which it may modify in place.
using StepHook = std::function<void(int arrived_step, Eigen::MatrixXd& z)>;

// Deterministic probability-flow sampling from sigma(start_step) down to
// clean data.  The final step lands on the denoised estimate at sigma_min.
Eigen::MatrixXd sample(const World& w, const NoiseSchedule& schedule,
                       Eigen::MatrixXd z, int start_step,
                       const std::vector<int>& cond, const SampleOptions& opts,
                       const StepHook& hook = StepHook());

// Deterministic inversion of the same flow: maps clean frames up the schedule
// and records the whole trajectory (index t = state at sigma(t); entry 0 is
// the input).  Runs unconditionally (guidance weight 0 in sampling terms).
std::vector<Eigen::MatrixXd> invert(const World& w,
                                    const NoiseSchedule& schedule,
                                    const Eigen::MatrixXd& clean,
                                    int top_step);

}  // namespace retimbre
