#pragma once

#include <Eigen/Dense>
#include <vector>

#include "retimbre/rng.hpp"

namespace retimbre {

// Mean absolute pitch deviation between decoded and reference tracks.
double pitch_deviation(const std::vector<int>& decoded,
                       const std::vector<int>& reference);

// Onset F1 with +/-tolerance frame matching.  Onsets are positions where the
// track changes value; greedy matching, each reference onset used once.
// Both tracks onset-free counts as a perfect 1.0.
double onset_f1(const std::vector<int>& decoded,
                const std::vector<int>& reference, int tolerance = 1);

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Moment fit over columns (biased covariance, 1/N).
GaussianStats fit_gaussian(const Eigen::MatrixXd& frames);

// Symmetric PSD square root via eigendecomposition (negative eigenvalues from
// roundoff are clamped to zero).
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m);

// Squared Frechet distance between two Gaussians:
//   |m1-m2|^2 + tr(C1 + C2 - 2 (C1^(1/2) C2 C1^(1/2))^(1/2)).
double frechet_gaussian(const GaussianStats& a, const GaussianStats& b);

struct BootstrapCi {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap CI for the mean of paired differences a - b.
BootstrapCi paired_bootstrap(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                             int n_boot, double coverage, Rng& rng);

}  // namespace retimbre
