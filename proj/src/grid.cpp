#include "retimbre/grid.hpp"

#include <cmath>
#include <cstdio>
#include <future>
#include <stdexcept>

#include <json.hpp>

#include "retimbre/mi.hpp"
#include "retimbre/rng.hpp"

namespace retimbre {

namespace {

struct PairedSet {
  Eigen::MatrixXd z;    // pooled context frames, clip i occupies columns
                        // [i*T, (i+1)*T)
  Eigen::MatrixXd eps;  // pooled per-edit noise, same layout
  Eigen::MatrixXd ref;  // pooled fresh frames of each clip's target class
  std::vector<int> instruments;
  std::vector<int> targets;
  std::vector<std::vector<int>> tracks;
  std::vector<int> cond_cols;  // per pooled column: the clip's target
};

PairedSet make_pairs(const World& w, const HarnessConfig& cfg) {
  const int T = cfg.frames_per_clip;
  const int C = w.cfg.channels;
  const int I = w.cfg.instruments;
  const int P = w.cfg.pitches;

  PairedSet ps;
  ps.z.resize(C, static_cast<Eigen::Index>(cfg.n_clips) * T);
  ps.eps.resize(C, static_cast<Eigen::Index>(cfg.n_clips) * T);
  ps.ref.resize(C, static_cast<Eigen::Index>(cfg.n_clips) * T);
  ps.instruments.resize(static_cast<std::size_t>(cfg.n_clips));
  ps.targets.resize(static_cast<std::size_t>(cfg.n_clips));
  ps.tracks.resize(static_cast<std::size_t>(cfg.n_clips));
  ps.cond_cols.resize(static_cast<std::size_t>(cfg.n_clips) * static_cast<std::size_t>(T));

  for (int i = 0; i < cfg.n_clips; ++i) {
    Rng clip_rng(derive_seed(cfg.seed, 3 * static_cast<std::uint64_t>(i)));
    const Clip clip = sample_clip(w, T, clip_rng);
    ps.z.middleCols(static_cast<Eigen::Index>(i) * T, T) = clip.frames;
    ps.instruments[static_cast<std::size_t>(i)] = clip.instrument;
    ps.tracks[static_cast<std::size_t>(i)] = clip.pitches;

    Rng edit_rng(derive_seed(cfg.seed, 3 * static_cast<std::uint64_t>(i) + 1));
    const int target =
        (clip.instrument + 1 +
         static_cast<int>(edit_rng.below(static_cast<std::uint64_t>(I - 1)))) % I;
    ps.targets[static_cast<std::size_t>(i)] = target;
    ps.eps.middleCols(static_cast<Eigen::Index>(i) * T, T) = edit_rng.normal_matrix(C, T);
    for (int t = 0; t < T; ++t)
      ps.cond_cols[static_cast<std::size_t>(i * T + t)] = target;

    // Reference population for the distribution metric: fresh frames of the
    // target class, pitches uniform.
    Rng ref_rng(derive_seed(cfg.seed, 3 * static_cast<std::uint64_t>(i) + 2));
    for (int t = 0; t < T; ++t) {
      const int p = static_cast<int>(ref_rng.below(static_cast<std::uint64_t>(P)));
      ps.ref.col(static_cast<Eigen::Index>(i) * T + t) =
          w.means.col(w.component(target, p)) +
          w.cfg.tau * ref_rng.normal_vector(C);
    }
  }
  return ps;
}

MethodMetrics evaluate(const World& w, const PairedSet& ps, int n_clips, int T,
                       const GaussianStats& ref_stats,
                       const Eigen::MatrixXd& out, std::string method,
                       std::optional<double> k, std::optional<double> f) {
  MethodMetrics m;
  m.method = std::move(method);
  m.k = k;
  m.f = f;
  m.dpd.resize(n_clips);
  m.f1.resize(n_clips);
  m.class_sim.resize(n_clips);

  const std::vector<int> decoded = decode_pitch(w, out);
  for (int i = 0; i < n_clips; ++i) {
    std::vector<int> dec(decoded.begin() + static_cast<std::ptrdiff_t>(i) * T,
                         decoded.begin() + static_cast<std::ptrdiff_t>(i + 1) * T);
    const std::vector<int>& truth = ps.tracks[static_cast<std::size_t>(i)];
    m.dpd(i) = pitch_deviation(dec, truth);
    m.f1(i) = onset_f1(dec, truth);
    const Eigen::VectorXd post =
        class_posterior(w, out.middleCols(static_cast<Eigen::Index>(i) * T, T));
    m.class_sim(i) = post(ps.targets[static_cast<std::size_t>(i)]);
  }
  m.fad_analog = frechet_gaussian(fit_gaussian(out), ref_stats);
  return m;
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

const MethodMetrics* GridRunResult::find(const std::string& method, double k,
                                         double f) const {
  for (const auto& r : rows)
    if (r.method == method && r.k && std::abs(*r.k - k) < 1e-12 && r.f &&
        std::abs(*r.f - f) < 1e-12)
      return &r;
  return nullptr;
}

const MethodMetrics* GridRunResult::find(const std::string& method) const {
  for (const auto& r : rows)
    if (r.method == method) return &r;
  return nullptr;
}

GridRunResult run_grid(const World& w, const NoiseSchedule& schedule,
                       const Eigen::VectorXd& mi_scores,
                       const HarnessConfig& cfg) {
  if (cfg.n_clips < 1) throw std::invalid_argument("need >= 1 clip");
  const int T = cfg.frames_per_clip;
  const int steps = schedule.steps();
  const PairedSet ps = make_pairs(w, cfg);
  const GaussianStats ref_stats = fit_gaussian(ps.ref);

  // Shared unconditional inversion of the pooled contexts, cached per level.
  const std::vector<Eigen::MatrixXd> traj = invert(w, schedule, ps.z, steps);

  const int t_f = step_for_fraction(schedule, cfg.f_par);
  const SampleOptions so{cfg.cfg_weight, StepMethod::kEuler};

  struct Job {
    std::string method;
    std::optional<double> k, f;
    std::function<Eigen::MatrixXd()> run;
  };
  std::vector<Job> jobs;

  jobs.push_back({kMethodPni, std::nullopt, cfg.f_par, [&] {
    Eigen::MatrixXd z = ps.z + schedule.sigma(t_f) * ps.eps;
    return sample(w, schedule, std::move(z), t_f, ps.cond_cols, so);
  }});
  jobs.push_back({kMethodDdimPni, std::nullopt, cfg.f_par, [&] {
    return sample(w, schedule, traj[static_cast<std::size_t>(t_f)], t_f,
                  ps.cond_cols, so);
  }});
  jobs.push_back({kMethodDdimInversion, std::nullopt, std::nullopt, [&] {
    return sample(w, schedule, traj[static_cast<std::size_t>(steps)], steps,
                  ps.cond_cols, so);
  }});
  for (double k : cfg.k_grid) {
    for (double f_clamp : cfg.f_clamp_grid) {
      jobs.push_back({kMethodMiInpaint, k, f_clamp, [&, k, f_clamp] {
        const std::vector<bool> mask = build_mask(mi_scores, k);
        const int release = clamp_release_step(steps, f_clamp);
        Eigen::MatrixXd z0 =
            masked_init(traj.back(), ps.eps, schedule.sigma_max(), mask);
        return sample(w, schedule, std::move(z0), steps, ps.cond_cols, so,
                      make_clamp_hook(traj, mask, release));
      }});
    }
  }

  GridRunResult result;
  result.rows.resize(jobs.size());
  const std::size_t batch = static_cast<std::size_t>(std::max(1, cfg.max_parallel));
  for (std::size_t base = 0; base < jobs.size(); base += batch) {
    const std::size_t hi = std::min(jobs.size(), base + batch);
    std::vector<std::future<MethodMetrics>> futs;
    for (std::size_t j = base; j < hi; ++j) {
      futs.push_back(std::async(std::launch::async, [&, j] {
        return evaluate(w, ps, cfg.n_clips, T, ref_stats, jobs[j].run(),
                        jobs[j].method, jobs[j].k, jobs[j].f);
      }));
    }
    for (std::size_t j = base; j < hi; ++j) result.rows[j] = futs[j - base].get();
  }
  return result;
}

std::string grid_csv(const GridRunResult& result) {
  std::string out = "method,k,f,fad_analog,dpd_analog,class_sim,onset_f1\n";
  for (const auto& r : result.rows) {
    out += r.method;
    out += ',';
    if (r.k) out += fmt6(*r.k);
    out += ',';
    if (r.f) out += fmt6(*r.f);
    out += ',';
    out += fmt6(r.fad_analog);
    out += ',';
    out += fmt6(r.mean_dpd());
    out += ',';
    out += fmt6(r.mean_class_sim());
    out += ',';
    out += fmt6(r.mean_f1());
    out += '\n';
  }
  return out;
}

std::string grid_json(const GridRunResult& result, const HarnessConfig& cfg) {
  nlohmann::json j;
  j["config"] = {{"n_clips", cfg.n_clips},
                 {"frames_per_clip", cfg.frames_per_clip},
                 {"k_grid", cfg.k_grid},
                 {"f_clamp_grid", cfg.f_clamp_grid},
                 {"f_par", cfg.f_par},
                 {"cfg_weight", cfg.cfg_weight},
                 {"seed", cfg.seed}};
  j["rows"] = nlohmann::json::array();
  for (const auto& r : result.rows) {
    nlohmann::json row;
    row["method"] = r.method;
    if (r.k) row["k"] = *r.k;
    if (r.f) row["f"] = *r.f;
    row["fad_analog"] = r.fad_analog;
    row["dpd_analog"] = r.mean_dpd();
    row["class_sim"] = r.mean_class_sim();
    row["onset_f1"] = r.mean_f1();
    j["rows"].push_back(row);
  }
  return j.dump(2) + "\n";
}

}  // namespace retimbre
