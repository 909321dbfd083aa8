#include "retimbre/mi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace retimbre {

std::vector<int> quantile_bins(const Eigen::VectorXd& x, int bins) {
  const auto n = static_cast<std::size_t>(x.size());
  if (bins < 1) throw std::invalid_argument("need >= 1 bin");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return x[static_cast<Eigen::Index>(a)] < x[static_cast<Eigen::Index>(b)];
                   });

  std::vector<int> out(n);
  int prev_bin = 0;
  for (std::size_t r = 0; r < n; ++r) {
    int b = static_cast<int>((r * static_cast<std::size_t>(bins)) / n);
    if (r > 0 && x[static_cast<Eigen::Index>(order[r])] ==
                     x[static_cast<Eigen::Index>(order[r - 1])])
      b = prev_bin;  // ties share the first occurrence's bin
    out[order[r]] = b;
    prev_bin = b;
  }
  return out;
}

double discrete_mi_bits(const std::vector<int>& a, int a_card,
                        const std::vector<int>& b, int b_card) {
  if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
  const double n = static_cast<double>(a.size());
  if (n == 0.0) return 0.0;

  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(a_card, b_card);
  for (std::size_t i = 0; i < a.size(); ++i) joint(a[i], b[i]) += 1.0;
  joint /= n;

  const Eigen::VectorXd pa = joint.rowwise().sum();
  const Eigen::VectorXd pb = joint.colwise().sum();
  double mi = 0.0;
  for (int i = 0; i < a_card; ++i)
    for (int j = 0; j < b_card; ++j)
      if (joint(i, j) > 0.0)
        mi += joint(i, j) * std::log2(joint(i, j) / (pa(i) * pb(j)));
  return mi;
}

namespace {

double entropy_bits(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > 0.0) h -= p(i) * std::log2(p(i));
  return h;
}

}  // namespace

double normalized_mi(const Eigen::VectorXd& x, const std::vector<int>& labels,
                     int n_labels, int bins) {
  const std::vector<int> bx = quantile_bins(x, bins);
  const double n = static_cast<double>(labels.size());
  if (n == 0.0) return 0.0;

  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(bins, n_labels);
  for (std::size_t i = 0; i < labels.size(); ++i) joint(bx[i], labels[i]) += 1.0;
  joint /= n;
  const Eigen::VectorXd px = joint.rowwise().sum();
  const Eigen::VectorXd py = joint.colwise().sum();

  double mi = 0.0;
  for (int i = 0; i < bins; ++i)
    for (int j = 0; j < n_labels; ++j)
      if (joint(i, j) > 0.0)
        mi += joint(i, j) * std::log2(joint(i, j) / (px(i) * py(j)));

  const double den = std::min(entropy_bits(px), entropy_bits(py));
  return den > 0.0 ? mi / den : 0.0;
}

Eigen::VectorXd channel_mi(const Eigen::MatrixXd& frames,
                           const std::vector<int>& labels, int n_labels,
                           int bins) {
  if (static_cast<Eigen::Index>(labels.size()) != frames.cols())
    throw std::invalid_argument("one label per frame required");
  Eigen::VectorXd scores(frames.rows());
  for (Eigen::Index c = 0; c < frames.rows(); ++c)
    scores(c) = normalized_mi(frames.row(c).transpose(), labels, n_labels, bins);
  return scores;
}

double shuffled_null_threshold(const Eigen::MatrixXd& frames,
                               const std::vector<int>& labels, int n_labels,
                               int n_shuffles, double quantile, Rng& rng,
                               int bins) {
  std::vector<int> shuffled = labels;
  std::vector<double> maxima;
  maxima.reserve(static_cast<std::size_t>(n_shuffles));
  for (int s = 0; s < n_shuffles; ++s) {
    rng.shuffle(shuffled);
    const Eigen::VectorXd sc = channel_mi(frames, shuffled, n_labels, bins);
    maxima.push_back(sc.maxCoeff());
  }
  std::sort(maxima.begin(), maxima.end());
  const double pos = quantile * static_cast<double>(maxima.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - std::floor(pos);
  return maxima[lo] * (1.0 - frac) + maxima[hi] * frac;
}

std::vector<bool> build_mask(const Eigen::VectorXd& scores, double k) {
  const int c = static_cast<int>(scores.size());
  int n = static_cast<int>(std::lround(k * c));
  n = std::clamp(n, 0, c);
  std::vector<int> order(static_cast<std::size_t>(c));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores(a) != scores(b)) return scores(a) > scores(b);
    return a < b;  // ties -> lower channel index first
  });
  std::vector<bool> mask(static_cast<std::size_t>(c), false);
  for (int i = 0; i < n; ++i) mask[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
  return mask;
}

std::vector<double> cumulative_score_curve(const Eigen::VectorXd& scores) {
  std::vector<double> s(scores.data(), scores.data() + scores.size());
  std::sort(s.begin(), s.end(), std::greater<double>());
  const double total = std::accumulate(s.begin(), s.end(), 0.0);
  std::vector<double> out;
  out.reserve(s.size());
  double acc = 0.0;
  for (double v : s) {
    acc += v;
    out.push_back(total > 0.0 ? acc / total : 0.0);
  }
  return out;
}

}  // namespace retimbre
