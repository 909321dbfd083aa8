#include "retimbre/probe.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>

namespace retimbre {

Eigen::MatrixXd make_swapped(const Eigen::MatrixXd& frames,
                             const std::vector<int>& instruments,
                             const std::vector<bool>& mask, Rng& rng) {
  const auto n = static_cast<std::size_t>(frames.cols());
  if (instruments.size() != n)
    throw std::invalid_argument("one instrument label per frame required");
  if (static_cast<Eigen::Index>(mask.size()) != frames.rows())
    throw std::invalid_argument("one mask entry per channel required");

  Eigen::MatrixXd out = frames;
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t donor;
    do {
      donor = static_cast<std::size_t>(rng.below(n));
    } while (instruments[donor] == instruments[j]);
    for (Eigen::Index c = 0; c < frames.rows(); ++c)
      if (mask[static_cast<std::size_t>(c)])
        out(c, static_cast<Eigen::Index>(j)) = frames(c, static_cast<Eigen::Index>(donor));
  }
  return out;
}

namespace {

using Eigen::Index;
using MatrixXf = Eigen::MatrixXf;
using VectorXf = Eigen::VectorXf;

// Row-per-sample feature matrix: channels, masked x unmasked products, log sigma.
MatrixXf feature_rows(const Eigen::MatrixXd& frames,
                      const std::vector<int>& in_ch,
                      const std::vector<int>& out_ch, double log_sigma) {
  const Index n = frames.cols();
  const Index c = frames.rows();
  const Index ni = static_cast<Index>(in_ch.size());
  const Index no = static_cast<Index>(out_ch.size());
  MatrixXf x(n, c + ni * no + 1);
  for (Index j = 0; j < n; ++j) {
    for (Index ch = 0; ch < c; ++ch) x(j, ch) = static_cast<float>(frames(ch, j));
    Index col = c;
    for (Index a = 0; a < ni; ++a) {
      const float za = static_cast<float>(frames(in_ch[static_cast<std::size_t>(a)], j));
      for (Index b = 0; b < no; ++b)
        x(j, col++) = za * static_cast<float>(frames(out_ch[static_cast<std::size_t>(b)], j));
    }
    x(j, col) = static_cast<float>(log_sigma);
  }
  return x;
}

struct TrainResult {
  double accuracy = 0.0;
  int n_test = 0;
};

// L2-regularized logistic regression fit by Newton iterations (IRLS) on
// standardized features; deterministic and step-size free.
TrainResult train_eval(MatrixXf x, const std::vector<float>& labels,
                       const std::vector<Index>& order, const ProbeOptions& opts) {
  const Index n = x.rows();
  const Index d = x.cols();
  const Index n_train = static_cast<Index>(
      std::floor(opts.train_fraction * static_cast<double>(n)));
  const Index n_test = n - n_train;

  MatrixXf xtr(n_train, d + 1), xte(n_test, d + 1);
  VectorXf ytr(n_train), yte(n_test);
  for (Index i = 0; i < n_train; ++i) {
    xtr.row(i).head(d) = x.row(order[static_cast<std::size_t>(i)]);
    ytr(i) = labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
  }
  for (Index i = 0; i < n_test; ++i) {
    xte.row(i).head(d) = x.row(order[static_cast<std::size_t>(n_train + i)]);
    yte(i) = labels[static_cast<std::size_t>(order[static_cast<std::size_t>(n_train + i)])];
  }

  // Standardize by training statistics; the trailing intercept column is 1.
  const Eigen::RowVectorXf mean = xtr.leftCols(d).colwise().mean();
  Eigen::RowVectorXf sd =
      ((xtr.leftCols(d).rowwise() - mean).array().square().colwise().mean())
          .sqrt();
  sd = sd.array() + 1e-9f;
  xtr.leftCols(d) = (xtr.leftCols(d).rowwise() - mean).array().rowwise() / sd.array();
  xte.leftCols(d) = (xte.leftCols(d).rowwise() - mean).array().rowwise() / sd.array();
  xtr.col(d).setOnes();
  xte.col(d).setOnes();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
  const double l2 = opts.l2;
  const double inv_n = 1.0 / static_cast<double>(n_train);
  MatrixXf scaled(n_train, d + 1);
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    VectorXf p = xtr * w.cast<float>();
    p = (1.0f + (-p.array()).exp()).inverse();  // sigmoid
    const VectorXf err = p - ytr;
    Eigen::VectorXd grad =
        (xtr.transpose() * err).cast<double>() * inv_n + l2 * w;
    grad(d) -= l2 * w(d);  // intercept is not penalized
    // Newton direction from the weighted normal equations.
    const VectorXf wt = (p.array() * (1.0f - p.array())).sqrt();
    scaled = wt.asDiagonal() * xtr;
    MatrixXf hf = MatrixXf::Zero(d + 1, d + 1);
    hf.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
    Eigen::MatrixXd h =
        MatrixXf(hf.selfadjointView<Eigen::Lower>()).cast<double>() * inv_n;
    h.diagonal().head(d).array() += l2;
    h.diagonal()(d) += 1e-12;  // keep the solve well posed at saturation
    Eigen::VectorXd step = h.ldlt().solve(grad);
    const double len = step.norm();
    if (len > 20.0) step *= 20.0 / len;  // guard early overshoot
    w -= step;
    if (step.lpNorm<Eigen::Infinity>() < 1e-4) break;
  }

  const VectorXf s = xte * w.cast<float>();
  int correct = 0;
  for (Index i = 0; i < n_test; ++i)
    if ((s(i) > 0.0f) == (yte(i) > 0.5f)) ++correct;
  TrainResult r;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(n_test);
  r.n_test = static_cast<int>(n_test);
  return r;
}

ProbePoint probe_at_fraction(const NoiseSchedule& schedule, double f,
                             const Eigen::MatrixXd& clean,
                             const Eigen::MatrixXd& swapped,
                             const std::vector<int>& in_ch,
                             const std::vector<int>& out_ch,
                             const ProbeOptions& opts, std::uint64_t seed) {
  Rng rng(seed);
  const int step = step_for_fraction(schedule, f);
  const double sigma = schedule.sigma(step);
  const Index n = clean.cols();

  const Eigen::MatrixXd zc =
      clean + sigma * rng.normal_matrix(static_cast<int>(clean.rows()),
                                        static_cast<int>(n));
  const Eigen::MatrixXd zw =
      swapped + sigma * rng.normal_matrix(static_cast<int>(clean.rows()),
                                          static_cast<int>(n));

  const double log_sigma = std::log(sigma);
  MatrixXf x(2 * n, clean.rows() + static_cast<Index>(in_ch.size() * out_ch.size()) + 1);
  x.topRows(n) = feature_rows(zc, in_ch, out_ch, log_sigma);
  x.bottomRows(n) = feature_rows(zw, in_ch, out_ch, log_sigma);
  std::vector<float> labels(static_cast<std::size_t>(2 * n), 0.0f);
  for (Index i = n; i < 2 * n; ++i) labels[static_cast<std::size_t>(i)] = 1.0f;

  std::vector<Index> order(static_cast<std::size_t>(2 * n));
  std::iota(order.begin(), order.end(), Index{0});
  rng.shuffle(order);

  const TrainResult tr = train_eval(std::move(x), labels, order, opts);
  ProbePoint pt;
  pt.f = f;
  pt.step = step;
  pt.sigma = sigma;
  pt.accuracy = tr.accuracy;
  pt.n_test = tr.n_test;
  return pt;
}

}  // namespace

ProbeResult run_probe(const World& w, const NoiseSchedule& schedule,
                      const std::vector<bool>& mask, const ProbeOptions& opts) {
  if (static_cast<int>(mask.size()) != w.cfg.channels)
    throw std::invalid_argument("one mask entry per channel required");
  const int n_in = static_cast<int>(std::count(mask.begin(), mask.end(), true));
  if (n_in == 0 || n_in == w.cfg.channels)
    throw std::invalid_argument("mask must split the channels");

  std::vector<int> in_ch, out_ch;
  for (int c = 0; c < w.cfg.channels; ++c)
    (mask[static_cast<std::size_t>(c)] ? in_ch : out_ch).push_back(c);

  Rng rng(derive_seed(opts.seed, 0));
  const FrameSet fs = sample_frames(w, opts.n_frames, rng);
  const Eigen::MatrixXd swapped = make_swapped(fs.frames, fs.instruments, mask, rng);

  std::vector<double> fgrid = opts.f_grid;
  std::sort(fgrid.begin(), fgrid.end());

  ProbeResult result;
  result.curve.resize(fgrid.size());
  const int batch = std::max(1, opts.max_parallel);
  for (std::size_t base = 0; base < fgrid.size(); base += static_cast<std::size_t>(batch)) {
    std::vector<std::future<ProbePoint>> futs;
    const std::size_t hi = std::min(fgrid.size(), base + static_cast<std::size_t>(batch));
    for (std::size_t i = base; i < hi; ++i) {
      futs.push_back(std::async(std::launch::async, [&, i] {
        return probe_at_fraction(schedule, fgrid[i], fs.frames, swapped, in_ch,
                                 out_ch, opts, derive_seed(opts.seed, 100 + i));
      }));
    }
    for (std::size_t i = base; i < hi; ++i) result.curve[i] = futs[i - base].get();
  }

  const auto [f_sel, ok] = select_f_par(result.curve, opts.select_delta);
  result.selected_f = f_sel;
  result.in_band = ok;
  return result;
}

std::pair<double, bool> select_f_par(const std::vector<ProbePoint>& curve,
                                     double delta) {
  std::vector<ProbePoint> pts = curve;
  std::sort(pts.begin(), pts.end(),
            [](const ProbePoint& a, const ProbePoint& b) { return a.f < b.f; });
  for (const ProbePoint& p : pts)
    if (std::abs(p.accuracy - 0.5) <= delta) return {p.f, true};
  return {pts.empty() ? 0.0 : pts.back().f, false};
}

}  // namespace retimbre
