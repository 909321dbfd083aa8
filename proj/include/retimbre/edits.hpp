#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "retimbre/sampler.hpp"
#include "retimbre/schedule.hpp"
#include "retimbre/world.hpp"

namespace retimbre {

enum class EditStrategy { kPni, kDdimPni, kDdimInversion, kMiInpaint };

struct EditConfig {
  EditStrategy strategy = EditStrategy::kMiInpaint;
  double k = 0.5;        // masked-channel fraction (MiInpaint only)
  double f_clamp = 0.45;  // clamp depth fraction (MiInpaint only)
  double f_par = 0.5;     // noise fraction (Pni / DdimPni only)
  double cfg_weight = 1.25;
  int target_instrument = 0;
  std::uint64_t seed = 0;
  StepMethod method = StepMethod::kEuler;
};

struct EditResult {
  Eigen::MatrixXd output;
  EditConfig config;
  double seconds = 0.0;
};

// The noise draw shared by all per-edit randomness: one epsilon per edit.
Eigen::MatrixXd edit_noise(const EditConfig& cfg, int channels, int frames);

// Number of leading refinement steps that stay clamped: the clamp releases
// after a round(f_clamp * steps) prefix of the schedule has run.
int clamp_release_step(int steps, double f_clamp);

// Initial state for masked inpainting: fresh noise at sigma_max on masked
// channels, the inverted context terminal state elsewhere.
Eigen::MatrixXd masked_init(const Eigen::MatrixXd& context_top,
                            const Eigen::MatrixXd& eps, double sigma_max,
                            const std::vector<bool>& mask);

// Post-step projection: at every arrival step >= release_step (including a
// release_step of 0, i.e. the final landing), unmasked channels are
// overwritten from the cached context trajectory.
StepHook make_clamp_hook(const std::vector<Eigen::MatrixXd>& trajectory,
                         const std::vector<bool>& mask, int release_step);

// Editing strategies.  ctx holds the source clip's clean frames (columns);
// conditioning pulls generation toward cfg.target_instrument at
// cfg.cfg_weight.

// Add sigma(t_f) * eps to the context and re-denoise; t_f from f_par.
EditResult edit_pni(const World& w, const NoiseSchedule& schedule,
                    const Eigen::MatrixXd& ctx, const EditConfig& cfg);

// Deterministically invert the context to t_f, then re-denoise.
EditResult edit_ddim_pni(const World& w, const NoiseSchedule& schedule,
                         const Eigen::MatrixXd& ctx, const EditConfig& cfg);

// Invert all the way to the top of the schedule, then re-denoise.
EditResult edit_ddim_inversion(const World& w, const NoiseSchedule& schedule,
                               const Eigen::MatrixXd& ctx,
                               const EditConfig& cfg);

// Channel-wise noise injection: masked channels restart from fresh noise,
// unmasked channels follow the cached inversion trajectory while clamped,
// and all channels refine freely after the clamp releases.
EditResult edit_mi_inpaint(const World& w, const NoiseSchedule& schedule,
                           const Eigen::MatrixXd& ctx, const EditConfig& cfg,
                           const std::vector<bool>& mask);

}  // namespace retimbre
