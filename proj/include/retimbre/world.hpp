#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "retimbre/rng.hpp"

namespace retimbre {

// Parameters of the synthetic latent world: a Gaussian-mixture data
// distribution over (instrument, pitch) components whose mean structure is
// organized into channel blocks with known semantics.
struct WorldConfig {
  int channels = 64;
  int instruments = 8;
  int pitches = 16;
  int clusters = 4;            // pitch clusters (coarse structure)
  double tau = 2.0;            // within-component standard deviation
  double entanglement = 0.25;  // how strongly shared channels couple identity
                               // into pitch-bearing structure
  double timbre_scale = 40.0;
  double cluster_scale = 20.0;
  double fine_scale = 2.5;
  double shared_scale = 6.0;
  double shared_fine_scale = 6.0;
  double interaction_scale = 24.0;  // identity x cluster coupling strength
  double leak_hi = 2.0;             // graded identity leak, strongest channel
  double leak_lo = 0.35;            // graded identity leak, weakest channel
  double mean_segment_frames = 8.0;
  std::uint64_t seed = 777;
};

struct World {
  WorldConfig cfg;
  // channels x (instruments * pitches); column index = instrument * P + pitch.
  Eigen::MatrixXd means;
  std::vector<int> timbre_channels;     // identity only
  std::vector<int> structure_channels;  // pitch only
  std::vector<int> shared_channels;     // both (strong block, then graded)
  std::vector<int> null_channels;       // neither

  int component(int instrument, int pitch) const {
    return instrument * cfg.pitches + pitch;
  }
  int components() const { return cfg.instruments * cfg.pitches; }
};

World build_world(const WorldConfig& cfg = WorldConfig());

// A clip: frames are columns, instrument is fixed, pitch follows a segmental
// track (geometric segment lengths, successive pitches distinct).
struct Clip {
  Eigen::MatrixXd frames;
  int instrument = 0;
  std::vector<int> pitches;
};

Clip sample_clip(const World& w, int n_frames, Rng& rng);

// Independent labelled frames (for estimation tasks): frames are columns.
struct FrameSet {
  Eigen::MatrixXd frames;
  std::vector<int> instruments;
  std::vector<int> pitches;
};

FrameSet sample_frames(const World& w, int n, Rng& rng);

// Exact posterior-mean denoiser for the mixture corrupted by N(0, sigma^2 I).
// cond restricts the mixture to one instrument's components; -1 = all.
Eigen::MatrixXd denoise(const World& w, const Eigen::MatrixXd& z, double sigma,
                        int cond = -1);

// Same, with an independent conditioning id per column (-1 entries allowed).
Eigen::MatrixXd denoise_each(const World& w, const Eigen::MatrixXd& z,
                             double sigma, const std::vector<int>& cond);

// Maximum-a-posteriori pitch per frame, read from the pitch-bearing channels
// (structure + shared) of clean frames.
std::vector<int> decode_pitch(const World& w, const Eigen::MatrixXd& frames);

// Posterior over instruments for a clip, averaged over frames.
Eigen::VectorXd class_posterior(const World& w, const Eigen::MatrixXd& frames);

}  // namespace retimbre
