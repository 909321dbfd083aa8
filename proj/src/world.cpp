#include "retimbre/world.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace retimbre {

namespace {

void validate(const WorldConfig& cfg) {
  if (cfg.channels < 8 || cfg.channels % 8 != 0)
    throw std::invalid_argument("channels must be a positive multiple of 8");
  if (cfg.instruments < 2) throw std::invalid_argument("need >= 2 instruments");
  if (cfg.pitches < 2) throw std::invalid_argument("need >= 2 pitches");
  if (cfg.clusters < 1 || cfg.pitches % cfg.clusters != 0)
    throw std::invalid_argument("clusters must divide pitches");
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!(cfg.mean_segment_frames >= 1.0))
    throw std::invalid_argument("mean segment length must be >= 1");
}

}  // namespace

World build_world(const WorldConfig& cfg) {
  validate(cfg);
  const int C = cfg.channels;
  const int I = cfg.instruments;
  const int P = cfg.pitches;
  const int Q = cfg.clusters;
  const int n_timbre = C / 4;
  const int n_struct = C / 4;
  const int n_strong = C / 8;
  const int n_graded = C / 4;
  const double lam = cfg.entanglement;

  World w;
  w.cfg = cfg;
  w.means = Eigen::MatrixXd::Zero(C, I * P);

  std::vector<int> cluster_of(static_cast<std::size_t>(P));
  for (int p = 0; p < P; ++p) cluster_of[static_cast<std::size_t>(p)] = p / (P / Q);

  int base = 0;

  // Timbre block: one level per (channel, instrument), flat across pitch.
  {
    Rng rng(derive_seed(cfg.seed, 1));
    Eigen::MatrixXd g = rng.normal_matrix(n_timbre, I) * cfg.timbre_scale;
    for (int ch = 0; ch < n_timbre; ++ch) {
      w.timbre_channels.push_back(base + ch);
      for (int i = 0; i < I; ++i)
        for (int p = 0; p < P; ++p)
          w.means(base + ch, i * P + p) = g(ch, i);
    }
    base += n_timbre;
  }

  // Structure block: coarse cluster pattern plus fine per-pitch detail, flat
  // across instrument.
  Eigen::MatrixXd coarse;  // reused below so the strong shared block tracks
                           // the same cluster geometry as structure channels
  {
    Rng rng(derive_seed(cfg.seed, 2));
    coarse = rng.normal_matrix(n_struct, Q);
    Eigen::MatrixXd fine = rng.normal_matrix(n_struct, P);
    for (int ch = 0; ch < n_struct; ++ch) {
      w.structure_channels.push_back(base + ch);
      for (int p = 0; p < P; ++p) {
        const double v = cfg.cluster_scale * coarse(ch, cluster_of[static_cast<std::size_t>(p)]) +
                         cfg.fine_scale * fine(ch, p);
        for (int i = 0; i < I; ++i) w.means(base + ch, i * P + p) = v;
      }
    }
    base += n_struct;
  }

  // Strong shared block: a normalized pitch pattern aligned with the matching
  // structure channel's cluster geometry, an additive identity offset, and an
  // identity x cluster interaction.  The offset and interaction scale with the
  // entanglement knob (interaction_scale is calibrated at entanglement 0.25),
  // so at zero entanglement these channels carry pitch only.
  {
    Rng rng(derive_seed(cfg.seed, 3));
    Eigen::MatrixXd fine = rng.normal_matrix(n_strong, P);
    Eigen::MatrixXd ident = rng.normal_matrix(n_strong, I);
    Eigen::MatrixXd inter = rng.normal_matrix(n_strong, I * Q);
    const double nrm = std::sqrt(cfg.cluster_scale * cfg.cluster_scale +
                                 cfg.fine_scale * cfg.fine_scale);
    for (int ch = 0; ch < n_strong; ++ch) {
      w.shared_channels.push_back(base + ch);
      for (int i = 0; i < I; ++i) {
        for (int p = 0; p < P; ++p) {
          const int cl = cluster_of[static_cast<std::size_t>(p)];
          const double pattern = (cfg.cluster_scale * coarse(ch, cl) +
                                  cfg.fine_scale * fine(ch, p)) / nrm;
          w.means(base + ch, i * P + p) =
              (1.0 - lam) * cfg.shared_scale * pattern +
              lam * cfg.shared_scale * ident(ch, i) +
              (lam / 0.25) * cfg.interaction_scale * inter(ch, i * Q + cl);
        }
      }
    }
    base += n_strong;
  }

  // Graded shared block: fine-grained pitch detail plus an identity leak that
  // decays geometrically across the block, so channels span a range of
  // identity-information strengths.
  {
    Rng rng(derive_seed(cfg.seed, 4));
    Eigen::MatrixXd fine = rng.normal_matrix(n_graded, P);
    Eigen::MatrixXd ident = rng.normal_matrix(n_graded, I);
    for (int ch = 0; ch < n_graded; ++ch) {
      w.shared_channels.push_back(base + ch);
      const double frac = n_graded > 1
          ? static_cast<double>(ch) / static_cast<double>(n_graded - 1)
          : 0.0;
      const double leak = cfg.leak_hi * std::pow(cfg.leak_lo / cfg.leak_hi, frac);
      for (int i = 0; i < I; ++i)
        for (int p = 0; p < P; ++p)
          w.means(base + ch, i * P + p) =
              cfg.shared_fine_scale * fine(ch, p) +
              lam * cfg.shared_scale * leak * ident(ch, i);
    }
    base += n_graded;
  }

  for (int ch = base; ch < C; ++ch) w.null_channels.push_back(ch);
  return w;
}

Clip sample_clip(const World& w, int n_frames, Rng& rng) {
  if (n_frames < 1) throw std::invalid_argument("clip needs >= 1 frame");
  const int I = w.cfg.instruments;
  const int P = w.cfg.pitches;

  Clip c;
  c.instrument = static_cast<int>(rng.below(static_cast<std::uint64_t>(I)));
  c.pitches.reserve(static_cast<std::size_t>(n_frames));
  int pitch = static_cast<int>(rng.below(static_cast<std::uint64_t>(P)));
  while (static_cast<int>(c.pitches.size()) < n_frames) {
    const int len = rng.geometric(1.0 / w.cfg.mean_segment_frames);
    for (int k = 0; k < len && static_cast<int>(c.pitches.size()) < n_frames; ++k)
      c.pitches.push_back(pitch);
    // Next pitch, uniform over the others.
    const int q = static_cast<int>(rng.below(static_cast<std::uint64_t>(P - 1)));
    pitch = q + (q >= pitch ? 1 : 0);
  }

  c.frames = w.cfg.tau * rng.normal_matrix(w.cfg.channels, n_frames);
  for (int t = 0; t < n_frames; ++t)
    c.frames.col(t) +=
        w.means.col(w.component(c.instrument, c.pitches[static_cast<std::size_t>(t)]));
  return c;
}

FrameSet sample_frames(const World& w, int n, Rng& rng) {
  FrameSet fs;
  fs.instruments.resize(static_cast<std::size_t>(n));
  fs.pitches.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    fs.instruments[static_cast<std::size_t>(k)] =
        static_cast<int>(rng.below(static_cast<std::uint64_t>(w.cfg.instruments)));
    fs.pitches[static_cast<std::size_t>(k)] =
        static_cast<int>(rng.below(static_cast<std::uint64_t>(w.cfg.pitches)));
  }
  fs.frames = w.cfg.tau * rng.normal_matrix(w.cfg.channels, n);
  for (int k = 0; k < n; ++k)
    fs.frames.col(k) += w.means.col(w.component(
        fs.instruments[static_cast<std::size_t>(k)], fs.pitches[static_cast<std::size_t>(k)]));
  return fs;
}

namespace {

// Posterior component weights for z under mixture component means `mu` with
// total per-channel variance v = tau^2 + sigma^2; returned as K x N.
Eigen::MatrixXd component_weights(const Eigen::Ref<const Eigen::MatrixXd>& mu,
                                  const Eigen::MatrixXd& z, double v) {
  const Eigen::MatrixXd cross = mu.transpose() * z;            // K x N
  const Eigen::VectorXd mu2 = mu.colwise().squaredNorm();      // K
  Eigen::MatrixXd logits = (cross - 0.5 * mu2.replicate(1, z.cols())) / v;
  for (Eigen::Index n = 0; n < logits.cols(); ++n) {
    const double m = logits.col(n).maxCoeff();
    logits.col(n) = (logits.col(n).array() - m).exp();
    logits.col(n) /= logits.col(n).sum();
  }
  return logits;
}

}  // namespace

Eigen::MatrixXd denoise(const World& w, const Eigen::MatrixXd& z, double sigma,
                        int cond) {
  const double tau2 = w.cfg.tau * w.cfg.tau;
  const double v = tau2 + sigma * sigma;
  const int P = w.cfg.pitches;
  const int k0 = cond < 0 ? 0 : cond * P;
  const int nk = cond < 0 ? w.components() : P;
  const auto mu = w.means.middleCols(k0, nk);
  const Eigen::MatrixXd wgt = component_weights(mu, z, v);
  return (tau2 * z + (sigma * sigma) * (mu * wgt)) / v;
}

Eigen::MatrixXd denoise_each(const World& w, const Eigen::MatrixXd& z,
                             double sigma, const std::vector<int>& cond) {
  if (static_cast<Eigen::Index>(cond.size()) != z.cols())
    throw std::invalid_argument("one conditioning id per frame required");
  std::map<int, std::vector<Eigen::Index>> groups;
  for (Eigen::Index n = 0; n < z.cols(); ++n)
    groups[cond[static_cast<std::size_t>(n)]].push_back(n);

  Eigen::MatrixXd out(z.rows(), z.cols());
  for (const auto& [id, cols] : groups) {
    Eigen::MatrixXd sub(z.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = z.col(cols[j]);
    const Eigen::MatrixXd den = denoise(w, sub, sigma, id);
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(cols[j]) = den.col(static_cast<Eigen::Index>(j));
  }
  return out;
}

std::vector<int> decode_pitch(const World& w, const Eigen::MatrixXd& frames) {
  const int I = w.cfg.instruments;
  const int P = w.cfg.pitches;
  std::vector<int> rows;
  rows.insert(rows.end(), w.structure_channels.begin(), w.structure_channels.end());
  rows.insert(rows.end(), w.shared_channels.begin(), w.shared_channels.end());

  Eigen::MatrixXd mu(static_cast<Eigen::Index>(rows.size()), w.components());
  Eigen::MatrixXd z(static_cast<Eigen::Index>(rows.size()), frames.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    mu.row(static_cast<Eigen::Index>(r)) = w.means.row(rows[r]);
    z.row(static_cast<Eigen::Index>(r)) = frames.row(rows[r]);
  }

  const double tau2 = w.cfg.tau * w.cfg.tau;
  const Eigen::MatrixXd cross = mu.transpose() * z;        // K x N
  const Eigen::VectorXd mu2 = mu.colwise().squaredNorm();  // K

  std::vector<int> out(static_cast<std::size_t>(frames.cols()));
  for (Eigen::Index n = 0; n < frames.cols(); ++n) {
    // Marginal score per pitch: logsumexp over instruments of the component
    // log-likelihoods (the ||z||^2 term is constant and drops).
    int best_p = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int p = 0; p < P; ++p) {
      double m = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < I; ++i) {
        const int k = i * P + p;
        const double s = (cross(k, n) - 0.5 * mu2(k)) / tau2;
        if (s > m) m = s;
      }
      double acc = 0.0;
      for (int i = 0; i < I; ++i) {
        const int k = i * P + p;
        acc += std::exp((cross(k, n) - 0.5 * mu2(k)) / tau2 - m);
      }
      const double score = m + std::log(acc);
      if (score > best_score) {
        best_score = score;
        best_p = p;
      }
    }
    out[static_cast<std::size_t>(n)] = best_p;
  }
  return out;
}

Eigen::VectorXd class_posterior(const World& w, const Eigen::MatrixXd& frames) {
  const int I = w.cfg.instruments;
  const int P = w.cfg.pitches;
  const double tau2 = w.cfg.tau * w.cfg.tau;
  const Eigen::MatrixXd wgt = component_weights(w.means, frames, tau2);  // K x N
  Eigen::VectorXd post = Eigen::VectorXd::Zero(I);
  for (Eigen::Index n = 0; n < frames.cols(); ++n)
    for (int i = 0; i < I; ++i)
      post(i) += wgt.middleRows(i * P, P).col(n).sum();
  return post / static_cast<double>(frames.cols());
}

}  // namespace retimbre
