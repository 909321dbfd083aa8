#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "retimbre/edits.hpp"
#include "retimbre/metrics.hpp"
#include "retimbre/schedule.hpp"
#include "retimbre/world.hpp"

namespace retimbre {

// Paired evaluation harness: the same context clips, targets, and noise draws
// are reused for every strategy and every grid cell.
struct HarnessConfig {
  int n_clips = 200;
  int frames_per_clip = 48;
  std::vector<double> k_grid = {0.55, 0.50, 0.45};
  std::vector<double> f_clamp_grid = {0.40, 0.45};
  double f_par = 0.5;  // noise fraction for the partial-noise strategies
  double cfg_weight = 1.25;
  std::uint64_t seed = 11;
  int max_parallel = 4;
};

// One evaluated configuration with per-clip metric arrays (for paired
// comparisons) and their summary.
struct MethodMetrics {
  std::string method;
  std::optional<double> k;  // mi-inpaint only
  std::optional<double> f;  // f_clamp for mi-inpaint, f_par for partial-noise
  double fad_analog = 0.0;
  Eigen::VectorXd dpd;        // per clip
  Eigen::VectorXd f1;         // per clip
  Eigen::VectorXd class_sim;  // per clip

  double mean_dpd() const { return dpd.mean(); }
  double mean_f1() const { return f1.mean(); }
  double mean_class_sim() const { return class_sim.mean(); }
};

struct GridRunResult {
  std::vector<MethodMetrics> rows;  // baselines first, then grid cells in
                                    // (k, f_clamp) iteration order
  const MethodMetrics* find(const std::string& method, double k, double f) const;
  const MethodMetrics* find(const std::string& method) const;
};

// Strategy names used in rows and reports.
inline constexpr const char* kMethodPni = "pni";
inline constexpr const char* kMethodDdimPni = "ddim-pni";
inline constexpr const char* kMethodDdimInversion = "ddim-inversion";
inline constexpr const char* kMethodMiInpaint = "mi-inpaint";

// Run the three baselines plus the mi-inpaint grid over shared paired clips.
// mi_scores are the per-channel relevance scores the masks are built from.
GridRunResult run_grid(const World& w, const NoiseSchedule& schedule,
                       const Eigen::VectorXd& mi_scores,
                       const HarnessConfig& cfg);

// Table-style report: method, k, f, fad_analog, dpd_analog, class_sim,
// onset_f1.  Fixed-precision formatting, bitwise reproducible.
std::string grid_csv(const GridRunResult& result);
std::string grid_json(const GridRunResult& result, const HarnessConfig& cfg);

}  // namespace retimbre
