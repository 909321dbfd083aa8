#include "retimbre/sampler.hpp"

#include <stdexcept>

namespace retimbre {

Eigen::MatrixXd guided_denoise(const World& w, const Eigen::MatrixXd& z,
                               double sigma, const std::vector<int>& cond,
                               double weight) {
  if (weight == 0.0 || cond.empty()) return denoise(w, z, sigma, -1);
  const Eigen::MatrixXd dc = denoise_each(w, z, sigma, cond);
  if (weight == 1.0) return dc;
  const Eigen::MatrixXd du = denoise(w, z, sigma, -1);
  return du + weight * (dc - du);
}

Eigen::MatrixXd sample(const World& w, const NoiseSchedule& schedule,
                       Eigen::MatrixXd z, int start_step,
                       const std::vector<int>& cond, const SampleOptions& opts,
                       const StepHook& hook) {
  if (start_step < 1 || start_step > schedule.steps())
    throw std::invalid_argument("start step outside schedule");

  for (int t = start_step; t > 0; --t) {
    const double s = schedule.sigma(t);
    const double s_next = schedule.sigma(t - 1);
    const Eigen::MatrixXd xhat = guided_denoise(w, z, s, cond, opts.guidance_weight);
    if (opts.method == StepMethod::kEuler) {
      z = xhat + (s_next / s) * (z - xhat);
    } else {
      // Heun: trapezoidal correction of the probability-flow derivative
      // d = (z - xhat) / sigma.
      const Eigen::MatrixXd d = (z - xhat) / s;
      Eigen::MatrixXd z_pred = z + (s_next - s) * d;
      const Eigen::MatrixXd xhat2 =
          guided_denoise(w, z_pred, s_next, cond, opts.guidance_weight);
      const Eigen::MatrixXd d2 = (z_pred - xhat2) / s_next;
      z = z + 0.5 * (s_next - s) * (d + d2);
    }
    if (hook && t - 1 >= 1) hook(t - 1, z);
  }
  // Land on clean data: denoise away the residual sigma_min.
  z = guided_denoise(w, z, schedule.sigma(0), cond, opts.guidance_weight);
  if (hook) hook(0, z);
  return z;
}

std::vector<Eigen::MatrixXd> invert(const World& w,
                                    const NoiseSchedule& schedule,
                                    const Eigen::MatrixXd& clean,
                                    int top_step) {
  if (top_step < 1 || top_step > schedule.steps())
    throw std::invalid_argument("top step outside schedule");

  std::vector<Eigen::MatrixXd> traj;
  traj.reserve(static_cast<std::size_t>(top_step) + 1);
  traj.push_back(clean);
  Eigen::MatrixXd z = clean;
  for (int t = 0; t < top_step; ++t) {
    // The clean input is treated as living at sigma_min (the schedule's floor).
    const double s = schedule.sigma(t);
    const Eigen::MatrixXd xhat = denoise(w, z, s, -1);
    z = xhat + (schedule.sigma(t + 1) / s) * (z - xhat);
    traj.push_back(z);
  }
  return traj;
}

}  // namespace retimbre
