#include <doctest.h>

#include <cmath>

#include "retimbre/edits.hpp"
#include "retimbre/mi.hpp"

using namespace retimbre;

namespace {

struct Fixture {
  World w = build_world();
  NoiseSchedule s = make_schedule();
  Clip clip;
  Eigen::VectorXd scores;

  Fixture() {
    Rng rng(61);
    clip = sample_clip(w, 16, rng);
    Rng mi_rng(63);
    const FrameSet fs = sample_frames(w, 6000, mi_rng);
    scores = channel_mi(fs.frames, fs.instruments, 8);
  }

  int target() const { return (clip.instrument + 3) % 8; }
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

}  // namespace

TEST_CASE("release step counts clamped refinement steps") {
  CHECK(clamp_release_step(30, 0.40) == 18);
  CHECK(clamp_release_step(30, 0.45) == 16);  // round(13.5) -> 14 clamped
  CHECK(clamp_release_step(30, 1.0) == 0);
  CHECK(clamp_release_step(30, 0.01) == 30);
  CHECK(clamp_release_step(200, 0.40) == 120);
}

TEST_CASE("full mask with no clamp reduces to plain conditional sampling") {
  const auto& f = fx();
  EditConfig cfg;
  cfg.strategy = EditStrategy::kMiInpaint;
  cfg.k = 1.0;
  cfg.f_clamp = 0.01;  // rounds to zero clamped steps
  cfg.target_instrument = f.target();
  cfg.seed = 77;

  const EditResult r =
      edit_mi_inpaint(f.w, f.s, f.clip.frames, cfg, std::vector<bool>(64, true));

  const Eigen::MatrixXd eps = edit_noise(cfg, 64, 16);
  const std::vector<int> cond(16, f.target());
  const Eigen::MatrixXd direct =
      sample(f.w, f.s, f.s.sigma_max() * eps, f.s.steps(), cond,
             SampleOptions{cfg.cfg_weight, StepMethod::kEuler});
  CHECK((r.output - direct).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("empty mask with a full clamp reproduces the context bit for bit") {
  const auto& f = fx();
  EditConfig cfg;
  cfg.strategy = EditStrategy::kMiInpaint;
  cfg.k = 0.0;
  cfg.f_clamp = 1.0;  // clamp all the way to the landing
  cfg.target_instrument = f.target();
  cfg.seed = 78;

  const EditResult r =
      edit_mi_inpaint(f.w, f.s, f.clip.frames, cfg, std::vector<bool>(64, false));
  CHECK((r.output - f.clip.frames).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("empty mask with a partial clamp reconstructs the context") {
  // A reconstruction conditions on the clip's own class; the clamp pins the
  // state to the cached trajectory until release, and the free tail then
  // resamples the inversion, so only tail discretization drift remains.
  // (Conditioning a k=0 run on a *different* class is a late-window edit
  // instead: the guided tail legitimately moves the timbre channels.)
  const auto& f = fx();
  EditConfig cfg;
  cfg.strategy = EditStrategy::kMiInpaint;
  cfg.k = 0.0;
  cfg.f_clamp = 0.45;
  cfg.target_instrument = f.clip.instrument;
  cfg.seed = 79;

  const EditResult r =
      edit_mi_inpaint(f.w, f.s, f.clip.frames, cfg, std::vector<bool>(64, false));
  const double rel = (r.output - f.clip.frames).norm() / f.clip.frames.norm();
  CHECK(rel < 0.05);
  const Eigen::VectorXd post = class_posterior(f.w, r.output);
  CHECK(post(f.clip.instrument) > 0.9);
}

TEST_CASE("clamped steps hold unmasked channels on the cached trajectory") {
  const auto& f = fx();
  const std::vector<bool> mask = build_mask(f.scores, 0.5);
  const int steps = f.s.steps();
  const int release = clamp_release_step(steps, 0.45);

  EditConfig cfg;
  cfg.strategy = EditStrategy::kMiInpaint;
  cfg.k = 0.5;
  cfg.f_clamp = 0.45;
  cfg.target_instrument = f.target();
  cfg.seed = 80;
  const EditResult r = edit_mi_inpaint(f.w, f.s, f.clip.frames, cfg, mask);

  // Replicate through the public pieces with a recording hook layered on the
  // clamp hook; the final outputs must agree bit for bit, which pins the
  // recorded states to what the strategy actually visited.
  const auto traj = invert(f.w, f.s, f.clip.frames, steps);
  const Eigen::MatrixXd eps = edit_noise(cfg, 64, 16);
  Eigen::MatrixXd z0 = masked_init(traj.back(), eps, f.s.sigma_max(), mask);
  const StepHook clamp = make_clamp_hook(traj, mask, release);

  int checked = 0;
  const StepHook recording = [&](int t, Eigen::MatrixXd& z) {
    clamp(t, z);
    if (t >= release) {
      const Eigen::MatrixXd& ref = traj[static_cast<std::size_t>(t)];
      for (int c = 0; c < 64; ++c)
        if (!mask[static_cast<std::size_t>(c)]) {
          CHECK((z.row(c) - ref.row(c)).cwiseAbs().maxCoeff() == 0.0);
          ++checked;
        }
    }
  };
  const std::vector<int> cond(16, f.target());
  const Eigen::MatrixXd out =
      sample(f.w, f.s, std::move(z0), steps, cond,
             SampleOptions{cfg.cfg_weight, StepMethod::kEuler}, recording);
  CHECK((out - r.output).cwiseAbs().maxCoeff() == 0.0);
  CHECK(checked == (steps - release) * 32);
}

TEST_CASE("fractions mapping to one release step give identical outputs") {
  const auto& f = fx();
  const std::vector<bool> mask = build_mask(f.scores, 0.5);
  REQUIRE(clamp_release_step(30, 0.45) == clamp_release_step(30, 0.46));

  EditConfig a;
  a.strategy = EditStrategy::kMiInpaint;
  a.k = 0.5;
  a.f_clamp = 0.45;
  a.target_instrument = f.target();
  a.seed = 81;
  EditConfig b = a;
  b.f_clamp = 0.46;

  const EditResult ra = edit_mi_inpaint(f.w, f.s, f.clip.frames, a, mask);
  const EditResult rb = edit_mi_inpaint(f.w, f.s, f.clip.frames, b, mask);
  CHECK((ra.output - rb.output).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("vanishing noise fraction leaves the context almost untouched") {
  const auto& f = fx();
  EditConfig cfg;
  cfg.strategy = EditStrategy::kPni;
  cfg.f_par = 0.0003;  // sigma lands on the smallest grid level
  cfg.target_instrument = f.target();
  cfg.seed = 82;
  const EditResult r = edit_pni(f.w, f.s, f.clip.frames, cfg);
  CHECK((r.output - f.clip.frames).norm() / f.clip.frames.norm() < 0.05);
}

TEST_CASE("inversion to the top makes ddim-pni coincide with ddim-inversion") {
  const auto& f = fx();
  EditConfig cfg;
  cfg.strategy = EditStrategy::kDdimPni;
  cfg.f_par = 1.0;
  cfg.target_instrument = f.target();
  cfg.seed = 83;
  const EditResult a = edit_ddim_pni(f.w, f.s, f.clip.frames, cfg);
  const EditResult b = edit_ddim_inversion(f.w, f.s, f.clip.frames, cfg);
  CHECK((a.output - b.output).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("editing moves the class posterior toward the target") {
  const auto& f = fx();
  const std::vector<bool> mask = build_mask(f.scores, 0.5);
  EditConfig cfg;
  cfg.strategy = EditStrategy::kMiInpaint;
  cfg.k = 0.5;
  cfg.f_clamp = 0.45;
  cfg.target_instrument = f.target();
  cfg.seed = 84;
  const EditResult r = edit_mi_inpaint(f.w, f.s, f.clip.frames, cfg, mask);
  const Eigen::VectorXd post = class_posterior(f.w, r.output);
  CHECK(post(f.target()) > 0.8);
}

TEST_CASE("edit configuration is validated") {
  const auto& f = fx();
  EditConfig cfg;
  cfg.f_par = 0.0;
  CHECK_THROWS(edit_pni(f.w, f.s, f.clip.frames, cfg));
  cfg.f_par = 1.5;
  CHECK_THROWS(edit_ddim_pni(f.w, f.s, f.clip.frames, cfg));

  EditConfig mi;
  mi.k = 0.5;
  mi.f_clamp = 0.45;
  // Mask popcount disagrees with k.
  CHECK_THROWS(edit_mi_inpaint(f.w, f.s, f.clip.frames, mi, std::vector<bool>(64, true)));
  mi.f_clamp = 0.0;
  CHECK_THROWS(edit_mi_inpaint(f.w, f.s, f.clip.frames, mi, build_mask(f.scores, 0.5)));
}
