#pragma once

#include <Eigen/Dense>
#include <vector>

#include "retimbre/rng.hpp"

namespace retimbre {

// Equal-frequency binning of a real-valued sample into `bins` bins.  Equal
// values always share one bin (the bin of the first occurrence in sorted
// order), so bin counts are only approximately equal under ties.
std::vector<int> quantile_bins(const Eigen::VectorXd& x, int bins);

// Plug-in mutual information (bits) between two discrete sequences.
double discrete_mi_bits(const std::vector<int>& a, int a_card,
                        const std::vector<int>& b, int b_card);

// MI between a scalar channel and integer labels, normalized by
// min(H(binned x), H(labels)); 0 when either entropy vanishes.
double normalized_mi(const Eigen::VectorXd& x, const std::vector<int>& labels,
                     int n_labels, int bins = 16);

// Per-channel normalized MI against labels; frames are columns.
Eigen::VectorXd channel_mi(const Eigen::MatrixXd& frames,
                           const std::vector<int>& labels, int n_labels,
                           int bins = 16);

// Null distribution of the score under label shuffling; returns the
// requested quantile (e.g. 0.99) of per-channel max scores pooled across
// shuffles.
double shuffled_null_threshold(const Eigen::MatrixXd& frames,
                               const std::vector<int>& labels, int n_labels,
                               int n_shuffles, double quantile, Rng& rng,
                               int bins = 16);

// Boolean channel mask selecting the round(k * C) highest-scoring channels;
// score ties resolve toward the lower channel index.
std::vector<bool> build_mask(const Eigen::VectorXd& scores, double k);

// Scores sorted descending, cumulated and normalized to end at 1 (all-zero
// scores give a zero curve).
std::vector<double> cumulative_score_curve(const Eigen::VectorXd& scores);

}  // namespace retimbre
