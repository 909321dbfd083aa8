#include "retimbre/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace retimbre {

double pitch_deviation(const std::vector<int>& decoded,
                       const std::vector<int>& reference) {
  if (decoded.size() != reference.size() || decoded.empty())
    throw std::invalid_argument("tracks must be equal length and non-empty");
  double acc = 0.0;
  for (std::size_t i = 0; i < decoded.size(); ++i)
    acc += std::abs(decoded[i] - reference[i]);
  return acc / static_cast<double>(decoded.size());
}

namespace {

std::vector<int> onsets(const std::vector<int>& track) {
  std::vector<int> out;
  for (std::size_t i = 1; i < track.size(); ++i)
    if (track[i] != track[i - 1]) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace

double onset_f1(const std::vector<int>& decoded,
                const std::vector<int>& reference, int tolerance) {
  const std::vector<int> po = onsets(decoded);
  const std::vector<int> to = onsets(reference);
  if (po.empty() && to.empty()) return 1.0;
  if (po.empty() || to.empty()) return 0.0;

  std::vector<bool> used(to.size(), false);
  int tp = 0;
  for (int o : po) {
    int best = -1;
    int best_dist = tolerance + 1;
    for (std::size_t j = 0; j < to.size(); ++j) {
      if (used[j]) continue;
      const int d = std::abs(o - to[j]);
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(j);
      }
    }
    if (best >= 0) {
      used[static_cast<std::size_t>(best)] = true;
      ++tp;
    }
  }
  if (tp == 0) return 0.0;
  const double prec = static_cast<double>(tp) / static_cast<double>(po.size());
  const double rec = static_cast<double>(tp) / static_cast<double>(to.size());
  return 2.0 * prec * rec / (prec + rec);
}

GaussianStats fit_gaussian(const Eigen::MatrixXd& frames) {
  if (frames.cols() < 1) throw std::invalid_argument("need >= 1 sample");
  GaussianStats g;
  g.mean = frames.rowwise().mean();
  const Eigen::MatrixXd centered = frames.colwise() - g.mean;
  g.cov = (centered * centered.transpose()) / static_cast<double>(frames.cols());
  return g;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double frechet_gaussian(const GaussianStats& a, const GaussianStats& b) {
  const double mean_term = (a.mean - b.mean).squaredNorm();
  const Eigen::MatrixXd ra = psd_sqrt(a.cov);
  const Eigen::MatrixXd inner = psd_sqrt(ra * b.cov * ra);
  const double trace_term =
      a.cov.trace() + b.cov.trace() - 2.0 * inner.trace();
  // Roundoff can push a zero trace term slightly negative.
  return mean_term + std::max(0.0, trace_term);
}

BootstrapCi paired_bootstrap(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                             int n_boot, double coverage, Rng& rng) {
  if (a.size() != b.size() || a.size() == 0)
    throw std::invalid_argument("paired samples must be equal length");
  const Eigen::VectorXd d = a - b;
  const auto n = static_cast<std::size_t>(d.size());

  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(n_boot));
  for (int bIdx = 0; bIdx < n_boot; ++bIdx) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += d(static_cast<Eigen::Index>(rng.below(n)));
    means.push_back(acc / static_cast<double>(n));
  }
  std::sort(means.begin(), means.end());

  auto percentile = [&](double q) {
    const double pos = q * static_cast<double>(means.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - std::floor(pos);
    return means[lo] * (1.0 - frac) + means[hi] * frac;
  };

  BootstrapCi ci;
  ci.mean = d.mean();
  const double tail = (1.0 - coverage) / 2.0;
  ci.lo = percentile(tail);
  ci.hi = percentile(1.0 - tail);
  return ci;
}

}  // namespace retimbre
