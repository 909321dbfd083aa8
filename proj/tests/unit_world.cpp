#include <doctest.h>

#include <cmath>
#include <set>

#include "retimbre/world.hpp"

using namespace retimbre;

namespace {

const World& default_world() {
  static const World w = build_world();
  return w;
}

}  // namespace

TEST_CASE("world block layout for the default configuration") {
  const World& w = default_world();
  CHECK(w.means.rows() == 64);
  CHECK(w.means.cols() == 8 * 16);
  CHECK(w.timbre_channels.size() == 16);
  CHECK(w.structure_channels.size() == 16);
  CHECK(w.shared_channels.size() == 24);
  CHECK(w.null_channels.size() == 8);
  CHECK(w.timbre_channels.front() == 0);
  CHECK(w.structure_channels.front() == 16);
  CHECK(w.shared_channels.front() == 32);
  CHECK(w.null_channels.front() == 56);
}

TEST_CASE("timbre channels depend on instrument only") {
  const World& w = default_world();
  for (int ch : w.timbre_channels) {
    for (int i = 0; i < 8; ++i)
      for (int p = 1; p < 16; ++p)
        CHECK(w.means(ch, w.component(i, p)) == w.means(ch, w.component(i, 0)));
    // And actually vary across instruments.
    std::set<double> distinct;
    for (int i = 0; i < 8; ++i) distinct.insert(w.means(ch, w.component(i, 0)));
    CHECK(distinct.size() == 8);
  }
}

TEST_CASE("structure channels depend on pitch only") {
  const World& w = default_world();
  for (int ch : w.structure_channels) {
    for (int p = 0; p < 16; ++p)
      for (int i = 1; i < 8; ++i)
        CHECK(w.means(ch, w.component(i, p)) == w.means(ch, w.component(0, p)));
    std::set<double> distinct;
    for (int p = 0; p < 16; ++p) distinct.insert(w.means(ch, w.component(0, p)));
    CHECK(distinct.size() == 16);
  }
}

TEST_CASE("null channels are silent") {
  const World& w = default_world();
  for (int ch : w.null_channels)
    for (int k = 0; k < w.components(); ++k) CHECK(w.means(ch, k) == 0.0);
}

TEST_CASE("shared channels depend on both factors when entangled") {
  const World& w = default_world();
  int varies_with_instrument = 0;
  int varies_with_pitch = 0;
  for (int ch : w.shared_channels) {
    bool vi = false, vp = false;
    for (int p = 0; p < 16 && !vi; ++p)
      for (int i = 1; i < 8 && !vi; ++i)
        vi = w.means(ch, w.component(i, p)) != w.means(ch, w.component(0, p));
    for (int i = 0; i < 8 && !vp; ++i)
      for (int p = 1; p < 16 && !vp; ++p)
        vp = w.means(ch, w.component(i, p)) != w.means(ch, w.component(i, 0));
    varies_with_instrument += vi;
    varies_with_pitch += vp;
  }
  CHECK(varies_with_instrument == 24);
  CHECK(varies_with_pitch == 24);
}

TEST_CASE("zero entanglement removes instrument information from shared channels") {
  WorldConfig cfg;
  cfg.entanglement = 0.0;
  const World w = build_world(cfg);
  for (int ch : w.shared_channels)
    for (int p = 0; p < 16; ++p)
      for (int i = 1; i < 8; ++i)
        CHECK(w.means(ch, w.component(i, p)) == w.means(ch, w.component(0, p)));
}

TEST_CASE("world construction is deterministic in the seed") {
  const World a = build_world();
  const World b = build_world();
  CHECK((a.means - b.means).cwiseAbs().maxCoeff() == 0.0);
  WorldConfig cfg;
  cfg.seed = 4321;
  const World c = build_world(cfg);
  CHECK((a.means - c.means).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("clips follow segmental pitch tracks") {
  const World& w = default_world();
  Rng rng(7);
  int segments = 0, frames = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Clip c = sample_clip(w, 64, rng);
    REQUIRE(c.pitches.size() == 64);
    CHECK(c.instrument >= 0);
    CHECK(c.instrument < 8);
    ++segments;  // first segment
    for (std::size_t t = 1; t < c.pitches.size(); ++t)
      if (c.pitches[t] != c.pitches[t - 1]) ++segments;
    frames += 64;
  }
  // Mean segment length targets 8 frames; truncation at the clip edge biases
  // it slightly short.
  const double mean_len = static_cast<double>(frames) / segments;
  CHECK(mean_len > 5.5);
  CHECK(mean_len < 9.0);
}

TEST_CASE("clip frames scatter around the component means") {
  const World& w = default_world();
  Rng rng(11);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(w.cfg.channels);
  int count = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Clip c = sample_clip(w, 16, rng);
    for (int t = 0; t < 16; ++t) {
      acc += c.frames.col(t) -
             w.means.col(w.component(c.instrument, c.pitches[static_cast<std::size_t>(t)]));
      ++count;
    }
  }
  // Residuals are N(0, tau^2); the mean of ~6400 of them has sd tau/80.
  CHECK((acc / count).cwiseAbs().maxCoeff() < 5.0 * w.cfg.tau / 80.0);
}

TEST_CASE("posterior-mean denoiser matches the single-component closed form") {
  // Hand-built world with one mixture component: the posterior mean is exactly
  // (tau^2 z + sigma^2 mu) / (tau^2 + sigma^2).
  World w;
  w.cfg.channels = 4;
  w.cfg.instruments = 1;
  w.cfg.pitches = 1;
  w.cfg.tau = 2.0;
  w.means = Eigen::MatrixXd::Zero(4, 1);
  w.means << 1.0, -2.0, 0.5, 3.0;

  Rng rng(3);
  const Eigen::MatrixXd z = rng.normal_matrix(4, 5) * 10.0;
  for (double sigma : {0.002, 0.7, 5.0, 80.0}) {
    const double v = w.cfg.tau * w.cfg.tau + sigma * sigma;
    const Eigen::MatrixXd want =
        (w.cfg.tau * w.cfg.tau * z + sigma * sigma * w.means.col(0).replicate(1, 5)) / v;
    const Eigen::MatrixXd got = denoise(w, z, sigma, -1);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("denoiser mixes two components with exact responsibilities") {
  // Two components in one channel; responsibilities have a closed form.
  World w;
  w.cfg.channels = 1;
  w.cfg.instruments = 2;
  w.cfg.pitches = 1;
  w.cfg.tau = 1.5;
  w.means = Eigen::MatrixXd(1, 2);
  w.means << -3.0, 5.0;

  const double sigma = 2.5;
  const double v = w.cfg.tau * w.cfg.tau + sigma * sigma;
  Eigen::MatrixXd z(1, 3);
  z << -2.0, 1.0, 4.0;
  for (int n = 0; n < 3; ++n) {
    const double l0 = -std::pow(z(0, n) - w.means(0, 0), 2) / (2 * v);
    const double l1 = -std::pow(z(0, n) - w.means(0, 1), 2) / (2 * v);
    const double w1 = 1.0 / (1.0 + std::exp(l0 - l1));
    const double mbar = (1.0 - w1) * w.means(0, 0) + w1 * w.means(0, 1);
    const double want = (w.cfg.tau * w.cfg.tau * z(0, n) + sigma * sigma * mbar) / v;
    const double got = denoise(w, z, sigma, -1)(0, n);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("conditioning restricts the denoiser to one instrument") {
  const World& w = default_world();
  Rng rng(5);
  const Eigen::MatrixXd z = rng.normal_matrix(64, 3) * 30.0;
  const double sigma = 10.0;
  // Conditioning on instrument i must equal denoising in a world holding only
  // that instrument's components.
  for (int i : {0, 3, 7}) {
    World sub;
    sub.cfg = w.cfg;
    sub.cfg.instruments = 1;
    sub.means = w.means.middleCols(i * 16, 16);
    const Eigen::MatrixXd want = denoise(sub, z, sigma, -1);
    const Eigen::MatrixXd got = denoise(w, z, sigma, i);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("per-column conditioning matches per-group denoising") {
  const World& w = default_world();
  Rng rng(6);
  const Eigen::MatrixXd z = rng.normal_matrix(64, 6) * 20.0;
  const std::vector<int> cond = {0, 2, 2, -1, 5, 0};
  const Eigen::MatrixXd got = denoise_each(w, z, 4.0, cond);
  for (int n = 0; n < 6; ++n) {
    const Eigen::MatrixXd want = denoise(w, z.col(n), 4.0, cond[static_cast<std::size_t>(n)]);
    CHECK((got.col(n) - want).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("pitch decoding recovers clean frames") {
  const World& w = default_world();
  Rng rng(8);
  const FrameSet fs = sample_frames(w, 2000, rng);
  const std::vector<int> dec = decode_pitch(w, fs.frames);
  int correct = 0;
  for (std::size_t k = 0; k < dec.size(); ++k)
    correct += dec[k] == fs.pitches[k];
  // Clean frames at tau = 2 sit far inside their pitch basins.
  CHECK(static_cast<double>(correct) / static_cast<double>(dec.size()) > 0.99);
}

TEST_CASE("pitch decoding matches a direct scan on a small case") {
  const World& w = default_world();
  Rng rng(9);
  const FrameSet fs = sample_frames(w, 10, rng);
  const std::vector<int> got = decode_pitch(w, fs.frames);

  // Independent re-implementation with plain loops over the same channels.
  std::vector<int> rows;
  rows.insert(rows.end(), w.structure_channels.begin(), w.structure_channels.end());
  rows.insert(rows.end(), w.shared_channels.begin(), w.shared_channels.end());
  const double tau2 = w.cfg.tau * w.cfg.tau;
  for (int n = 0; n < 10; ++n) {
    int best_p = -1;
    double best = -1e300;
    for (int p = 0; p < 16; ++p) {
      double score = 0.0;
      for (int i = 0; i < 8; ++i) {
        double d2 = 0.0;
        for (int r : rows) {
          const double diff = fs.frames(r, n) - w.means(r, w.component(i, p));
          d2 += diff * diff;
        }
        score += std::exp(-d2 / (2.0 * tau2));
      }
      if (score > best) {
        best = score;
        best_p = p;
      }
    }
    CHECK(got[static_cast<std::size_t>(n)] == best_p);
  }
}

TEST_CASE("class posterior identifies the instrument of clean clips") {
  const World& w = default_world();
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const Clip c = sample_clip(w, 12, rng);
    const Eigen::VectorXd post = class_posterior(w, c.frames);
    CHECK(post.size() == 8);
    CHECK(post.sum() == doctest::Approx(1.0).epsilon(1e-9));
    int argmax = 0;
    post.maxCoeff(&argmax);
    CHECK(argmax == c.instrument);
    CHECK(post(c.instrument) > 0.9);
  }
}

TEST_CASE("class posterior matches the two-component closed form") {
  World w;
  w.cfg.channels = 2;
  w.cfg.instruments = 2;
  w.cfg.pitches = 1;
  w.cfg.tau = 1.0;
  w.means = Eigen::MatrixXd(2, 2);
  w.means << 1.0, -1.0, 0.5, -0.5;

  Eigen::MatrixXd z(2, 1);
  z << 0.3, 0.1;
  const double d0 = (z.col(0) - w.means.col(0)).squaredNorm();
  const double d1 = (z.col(0) - w.means.col(1)).squaredNorm();
  const double p0 = 1.0 / (1.0 + std::exp((d0 - d1) / 2.0));
  const Eigen::VectorXd post = class_posterior(w, z);
  CHECK(post(0) == doctest::Approx(p0).epsilon(1e-12));
  CHECK(post(1) == doctest::Approx(1.0 - p0).epsilon(1e-12));
}

TEST_CASE("world configuration is validated") {
  WorldConfig cfg;
  cfg.channels = 60;  // not a multiple of 8
  CHECK_THROWS(build_world(cfg));
  cfg = WorldConfig();
  cfg.clusters = 5;  // does not divide 16 pitches
  CHECK_THROWS(build_world(cfg));
  cfg = WorldConfig();
  cfg.tau = 0.0;
  CHECK_THROWS(build_world(cfg));
}
