#include "retimbre/edits.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include "retimbre/rng.hpp"

namespace retimbre {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<int> target_columns(const EditConfig& cfg, Eigen::Index n) {
  return std::vector<int>(static_cast<std::size_t>(n), cfg.target_instrument);
}

void check_fraction(double f, const char* name) {
  if (!(f > 0.0) || f > 1.0)
    throw std::invalid_argument(std::string(name) + " must lie in (0, 1]");
}

}  // namespace

Eigen::MatrixXd edit_noise(const EditConfig& cfg, int channels, int frames) {
  Rng rng(derive_seed(cfg.seed, 0xE));
  return rng.normal_matrix(channels, frames);
}

int clamp_release_step(int steps, double f_clamp) {
  const int clamped = static_cast<int>(std::lround(f_clamp * steps));
  return steps - clamped;
}

Eigen::MatrixXd masked_init(const Eigen::MatrixXd& context_top,
                            const Eigen::MatrixXd& eps, double sigma_max,
                            const std::vector<bool>& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != context_top.rows())
    throw std::invalid_argument("one mask entry per channel required");
  Eigen::MatrixXd z = context_top;
  for (Eigen::Index c = 0; c < z.rows(); ++c)
    if (mask[static_cast<std::size_t>(c)]) z.row(c) = sigma_max * eps.row(c);
  return z;
}

StepHook make_clamp_hook(const std::vector<Eigen::MatrixXd>& trajectory,
                         const std::vector<bool>& mask, int release_step) {
  return [&trajectory, mask, release_step](int arrived, Eigen::MatrixXd& z) {
    if (arrived < release_step) return;
    const Eigen::MatrixXd& ref = trajectory[static_cast<std::size_t>(arrived)];
    for (Eigen::Index c = 0; c < z.rows(); ++c)
      if (!mask[static_cast<std::size_t>(c)]) z.row(c) = ref.row(c);
  };
}

EditResult edit_pni(const World& w, const NoiseSchedule& schedule,
                    const Eigen::MatrixXd& ctx, const EditConfig& cfg) {
  check_fraction(cfg.f_par, "f_par");
  const auto t0 = Clock::now();
  const int t_f = step_for_fraction(schedule, cfg.f_par);
  const Eigen::MatrixXd eps =
      edit_noise(cfg, static_cast<int>(ctx.rows()), static_cast<int>(ctx.cols()));
  Eigen::MatrixXd z = ctx + schedule.sigma(t_f) * eps;

  EditResult r;
  r.config = cfg;
  SampleOptions opts{cfg.cfg_weight, cfg.method};
  r.output = sample(w, schedule, std::move(z), t_f,
                    target_columns(cfg, ctx.cols()), opts);
  r.seconds = seconds_since(t0);
  return r;
}

EditResult edit_ddim_pni(const World& w, const NoiseSchedule& schedule,
                         const Eigen::MatrixXd& ctx, const EditConfig& cfg) {
  check_fraction(cfg.f_par, "f_par");
  const auto t0 = Clock::now();
  const int t_f = step_for_fraction(schedule, cfg.f_par);
  const std::vector<Eigen::MatrixXd> traj = invert(w, schedule, ctx, t_f);

  EditResult r;
  r.config = cfg;
  SampleOptions opts{cfg.cfg_weight, cfg.method};
  r.output = sample(w, schedule, traj.back(), t_f,
                    target_columns(cfg, ctx.cols()), opts);
  r.seconds = seconds_since(t0);
  return r;
}

EditResult edit_ddim_inversion(const World& w, const NoiseSchedule& schedule,
                               const Eigen::MatrixXd& ctx,
                               const EditConfig& cfg) {
  const auto t0 = Clock::now();
  const int top = schedule.steps();
  const std::vector<Eigen::MatrixXd> traj = invert(w, schedule, ctx, top);

  EditResult r;
  r.config = cfg;
  SampleOptions opts{cfg.cfg_weight, cfg.method};
  r.output = sample(w, schedule, traj.back(), top,
                    target_columns(cfg, ctx.cols()), opts);
  r.seconds = seconds_since(t0);
  return r;
}

EditResult edit_mi_inpaint(const World& w, const NoiseSchedule& schedule,
                           const Eigen::MatrixXd& ctx, const EditConfig& cfg,
                           const std::vector<bool>& mask) {
  check_fraction(cfg.f_clamp, "f_clamp");
  if (!(cfg.k >= 0.0) || cfg.k > 1.0)
    throw std::invalid_argument("k must lie in [0, 1]");
  const auto masked =
      static_cast<int>(std::count(mask.begin(), mask.end(), true));
  if (masked != static_cast<int>(std::lround(cfg.k * static_cast<double>(ctx.rows()))))
    throw std::invalid_argument("mask size does not match k");
  const auto t0 = Clock::now();
  const int top = schedule.steps();
  const std::vector<Eigen::MatrixXd> traj = invert(w, schedule, ctx, top);
  const Eigen::MatrixXd eps =
      edit_noise(cfg, static_cast<int>(ctx.rows()), static_cast<int>(ctx.cols()));
  Eigen::MatrixXd z = masked_init(traj.back(), eps, schedule.sigma_max(), mask);

  const int release = clamp_release_step(top, cfg.f_clamp);
  EditResult r;
  r.config = cfg;
  SampleOptions opts{cfg.cfg_weight, cfg.method};
  r.output = sample(w, schedule, std::move(z), top,
                    target_columns(cfg, ctx.cols()), opts,
                    make_clamp_hook(traj, mask, release));
  r.seconds = seconds_since(t0);
  return r;
}

}  // namespace retimbre
