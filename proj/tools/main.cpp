#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "retimbre/edits.hpp"
#include "retimbre/grid.hpp"
#include "retimbre/io.hpp"
#include "retimbre/metrics.hpp"
#include "retimbre/mi.hpp"
#include "retimbre/probe.hpp"
#include "retimbre/rng.hpp"
#include "retimbre/sampler.hpp"
#include "retimbre/schedule.hpp"
#include "retimbre/world.hpp"

namespace {

using nlohmann::json;
using namespace retimbre;

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  json config;  // parsed --config contents (empty object when absent)

  json section(const std::string& name) const {
    if (config.contains(name)) return config[name];
    return json::object();
  }
};

WorldConfig world_config(const GlobalArgs& g) {
  WorldConfig cfg;
  apply_world_overrides(cfg, g.section("world"));
  return cfg;
}

NoiseSchedule schedule_from(const GlobalArgs& g) {
  const json s = g.section("schedule");
  const int steps = s.value("steps", 30);
  const double smin = s.value("sigma_min", 0.002);
  const double smax = s.value("sigma_max", 80.0);
  const double rho = s.value("rho", 7.0);
  return make_schedule(steps, smin, smax, rho);
}

std::string out_path(const GlobalArgs& g, const std::string& name) {
  std::filesystem::create_directories(g.out_dir);
  return (std::filesystem::path(g.out_dir) / name).string();
}

// Per-channel relevance scores against instrument labels, used wherever a
// channel mask is needed.  Deterministic in (world, seed, n_frames).
Eigen::VectorXd mi_scores_for(const World& w, std::uint64_t seed, int n_frames,
                              int bins) {
  Rng rng(derive_seed(seed, 0x31));
  const FrameSet fs = sample_frames(w, n_frames, rng);
  return channel_mi(fs.frames, fs.instruments, w.cfg.instruments, bins);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

int cmd_gen_world(const GlobalArgs& g, int n_clips, int frames_per_clip) {
  WorldConfig cfg = world_config(g);
  if (g.seed) cfg.seed = *g.seed;
  const World w = build_world(cfg);

  json out;
  out["config"] = world_config_to_json(cfg);
  out["channel_groups"] = {{"timbre", w.timbre_channels},
                          {"structure", w.structure_channels},
                          {"shared", w.shared_channels},
                          {"null", w.null_channels}};
  write_text_file(out_path(g, "world.json"), out.dump(2) + "\n");

  if (n_clips > 0) {
    Rng rng(derive_seed(cfg.seed, 0xC11));
    std::string lines;
    for (int i = 0; i < n_clips; ++i) {
      const Clip c = sample_clip(w, frames_per_clip, rng);
      lines += clip_to_json(c).dump() + "\n";
    }
    write_text_file(out_path(g, "clips.jsonl"), lines);
  }
  std::cout << "world.json written (" << w.cfg.channels << " channels, "
            << w.cfg.instruments << " instruments, " << w.cfg.pitches
            << " pitches)";
  if (n_clips > 0) std::cout << "; " << n_clips << " clips in clips.jsonl";
  std::cout << "\n";
  return 0;
}

int cmd_analyze_mi(const GlobalArgs& g, int n_frames, int bins, int shuffles,
                   double k) {
  const WorldConfig cfg = world_config(g);
  const World w = build_world(cfg);
  const std::uint64_t seed = g.seed.value_or(cfg.seed);

  Rng rng(derive_seed(seed, 0x31));
  const FrameSet fs = sample_frames(w, n_frames, rng);
  const Eigen::VectorXd inst_mi =
      channel_mi(fs.frames, fs.instruments, w.cfg.instruments, bins);
  const Eigen::VectorXd pitch_mi =
      channel_mi(fs.frames, fs.pitches, w.cfg.pitches, bins);

  Rng null_rng(derive_seed(seed, 0x32));
  const double null_thr = shuffled_null_threshold(
      fs.frames, fs.instruments, w.cfg.instruments, shuffles, 0.99, null_rng, bins);

  auto group_of = [&](int ch) -> const char* {
    for (int c : w.timbre_channels) if (c == ch) return "timbre";
    for (int c : w.structure_channels) if (c == ch) return "structure";
    for (int c : w.shared_channels) if (c == ch) return "shared";
    return "null";
  };

  std::string csv = "channel,group,mi_instrument,mi_pitch\n";
  for (int c = 0; c < w.cfg.channels; ++c)
    csv += std::to_string(c) + "," + group_of(c) + "," + fmt(inst_mi(c)) + "," +
           fmt(pitch_mi(c)) + "\n";
  write_text_file(out_path(g, "mi.csv"), csv);

  const std::vector<bool> mask = build_mask(inst_mi, k);
  std::vector<int> selected;
  for (int c = 0; c < w.cfg.channels; ++c)
    if (mask[static_cast<std::size_t>(c)]) selected.push_back(c);
  json mj = {{"k", k},
             {"n_selected", selected.size()},
             {"channels", selected},
             {"null_threshold", null_thr},
             {"n_frames", n_frames},
             {"bins", bins},
             {"seed", seed}};
  write_text_file(out_path(g, "mask.json"), mj.dump(2) + "\n");

  std::string cum = "rank,cumulative_score_fraction\n";
  const std::vector<double> curve = cumulative_score_curve(inst_mi);
  for (std::size_t i = 0; i < curve.size(); ++i)
    cum += std::to_string(i + 1) + "," + fmt(curve[i]) + "\n";
  write_text_file(out_path(g, "cumulative.csv"), cum);

  std::cout << "mi.csv, mask.json, cumulative.csv written; " << selected.size()
            << " channels selected at k=" << k
            << ", null threshold " << fmt(null_thr) << "\n";
  return 0;
}

int cmd_probe(const GlobalArgs& g, int mi_frames, double k) {
  const WorldConfig cfg = world_config(g);
  const World w = build_world(cfg);
  const NoiseSchedule s = schedule_from(g);
  const std::uint64_t seed = g.seed.value_or(7);

  const Eigen::VectorXd scores = mi_scores_for(w, cfg.seed, mi_frames, 16);
  const std::vector<bool> mask = build_mask(scores, k);

  ProbeOptions opts;
  apply_probe_overrides(opts, g.section("probe"));
  opts.seed = seed;
  const ProbeResult res = run_probe(w, s, mask, opts);

  std::string csv = "f,step,sigma,accuracy,n_test\n";
  for (const ProbePoint& p : res.curve)
    csv += fmt(p.f) + "," + std::to_string(p.step) + "," + fmt(p.sigma) + "," +
           fmt(p.accuracy) + "," + std::to_string(p.n_test) + "\n";
  write_text_file(out_path(g, "probe.csv"), csv);

  json sel = {{"f_par", res.selected_f},
              {"in_band", res.in_band},
              {"k", k},
              {"seed", seed}};
  write_text_file(out_path(g, "selection.json"), sel.dump(2) + "\n");

  std::cout << "probe.csv written; selected f_par=" << res.selected_f
            << (res.in_band ? "" : " (WARNING: no point reached the chance band; largest f used)")
            << "\n";
  return 0;
}

int cmd_edit(const GlobalArgs& g, const std::string& strategy, double k,
             double f_clamp, double f_par, int target,
             const std::string& in_path, std::uint64_t clip_seed,
             int clip_frames, int mi_frames, const std::string& out_name) {
  const WorldConfig cfg = world_config(g);
  const World w = build_world(cfg);
  const NoiseSchedule s = schedule_from(g);

  Clip src;
  if (!in_path.empty()) {
    src = clip_from_json(json::parse(read_text_file(in_path)));
  } else {
    Rng rng(derive_seed(clip_seed, 0xC));
    src = sample_clip(w, clip_frames, rng);
  }
  if (target < 0 || target >= w.cfg.instruments)
    throw std::runtime_error("target instrument out of range");

  EditConfig ec;
  ec.strategy = strategy_from_name(strategy);
  ec.k = k;
  ec.f_clamp = f_clamp;
  ec.f_par = f_par;
  ec.target_instrument = target;
  ec.cfg_weight = g.section("edit").value("cfg_weight", 1.25);
  ec.seed = g.seed.value_or(0);

  EditResult r;
  switch (ec.strategy) {
    case EditStrategy::kPni:
      r = edit_pni(w, s, src.frames, ec);
      break;
    case EditStrategy::kDdimPni:
      r = edit_ddim_pni(w, s, src.frames, ec);
      break;
    case EditStrategy::kDdimInversion:
      r = edit_ddim_inversion(w, s, src.frames, ec);
      break;
    case EditStrategy::kMiInpaint: {
      const Eigen::VectorXd scores = mi_scores_for(w, cfg.seed, mi_frames, 16);
      r = edit_mi_inpaint(w, s, src.frames, ec, build_mask(scores, ec.k));
      break;
    }
  }

  const std::vector<int> dec = decode_pitch(w, r.output);
  const Eigen::VectorXd post = class_posterior(w, r.output);
  json out;
  out["config"] = edit_config_to_json(ec);
  out["source"] = clip_to_json(src);
  out["output"] = matrix_to_json(r.output);
  out["metrics"] = {{"dpd_analog", pitch_deviation(dec, src.pitches)},
                    {"onset_f1", onset_f1(dec, src.pitches)},
                    {"class_sim", post(ec.target_instrument)},
                    {"source_class_posterior", post(src.instrument)}};
  out["seconds"] = r.seconds;
  write_text_file(out_path(g, out_name), out.dump(2) + "\n");
  std::cout << out_name << " written; dpd=" << fmt(pitch_deviation(dec, src.pitches))
            << " f1=" << fmt(onset_f1(dec, src.pitches))
            << " class_sim=" << fmt(post(ec.target_instrument)) << "\n";
  return 0;
}

int cmd_grid(const GlobalArgs& g, int n_clips, int mi_frames) {
  const WorldConfig cfg = world_config(g);
  const World w = build_world(cfg);
  const NoiseSchedule s = schedule_from(g);

  HarnessConfig hc;
  apply_harness_overrides(hc, g.section("grid"));
  if (g.seed) hc.seed = *g.seed;
  if (n_clips > 0) hc.n_clips = n_clips;

  const Eigen::VectorXd scores = mi_scores_for(w, cfg.seed, mi_frames, 16);
  const GridRunResult res = run_grid(w, s, scores, hc);

  write_text_file(out_path(g, "grid.csv"), grid_csv(res));
  write_text_file(out_path(g, "grid.json"), grid_json(res, hc));
  std::cout << "grid.csv and grid.json written (" << res.rows.size()
            << " rows, " << hc.n_clips << " clips)\n";
  return 0;
}

int cmd_eval(const GlobalArgs& g, const std::string& edited_path,
             const std::string& source_path, int target) {
  const WorldConfig cfg = world_config(g);
  const World w = build_world(cfg);

  const json ej = json::parse(read_text_file(edited_path));
  const Eigen::MatrixXd out = matrix_from_json(
      ej.contains("output") ? ej.at("output") : ej.at("frames"));
  Clip src;
  if (!source_path.empty()) {
    src = clip_from_json(json::parse(read_text_file(source_path)));
  } else if (ej.contains("source")) {
    src = clip_from_json(ej.at("source"));
  } else {
    throw std::runtime_error("no source clip given (--source or embedded)");
  }
  if (target < 0) {
    if (ej.contains("config") && ej.at("config").contains("target_instrument"))
      target = ej.at("config").at("target_instrument").get<int>();
    else
      throw std::runtime_error("no target instrument given (--target or embedded)");
  }

  const std::vector<int> dec = decode_pitch(w, out);
  const Eigen::VectorXd post = class_posterior(w, out);
  json rep = {{"dpd_analog", pitch_deviation(dec, src.pitches)},
              {"onset_f1", onset_f1(dec, src.pitches)},
              {"class_sim", post(target)},
              {"source_class_posterior", post(src.instrument)},
              {"n_frames", out.cols()}};
  write_text_file(out_path(g, "eval.json"), rep.dump(2) + "\n");
  std::cout << rep.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic latent world for channel-masked diffusion editing"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--out-dir", g.out_dir, "output directory");
  std::uint64_t seed_opt = 0;
  auto* seed_flag = app.add_option("--seed", seed_opt, "run seed");

  auto* gen = app.add_subcommand("gen-world", "build the world and sample clips");
  int gen_clips = 0, gen_frames = 32;
  gen->add_option("--clips", gen_clips, "also sample this many clips");
  gen->add_option("--frames", gen_frames, "frames per sampled clip");

  auto* ami = app.add_subcommand("analyze-mi", "per-channel relevance scores and mask");
  int mi_n = 10000, mi_bins = 16, mi_shuffles = 20;
  double mi_k = 0.5;
  ami->add_option("--frames", mi_n, "frames for estimation");
  ami->add_option("--bins", mi_bins, "quantile bins");
  ami->add_option("--shuffles", mi_shuffles, "label shuffles for the null");
  ami->add_option("--k", mi_k, "mask fraction");

  auto* prb = app.add_subcommand("probe", "noise-level detectability curve");
  int prb_mi_frames = 10000;
  double prb_k = 0.5;
  prb->add_option("--mi-frames", prb_mi_frames, "frames for the mask scores");
  prb->add_option("--k", prb_k, "mask fraction");

  auto* edt = app.add_subcommand("edit", "run one editing strategy");
  std::string edt_strategy = "mi-inpaint", edt_in, edt_out = "result.json";
  double edt_k = 0.5, edt_fc = 0.45, edt_fp = 0.5;
  int edt_target = 0, edt_frames = 32, edt_mi_frames = 10000;
  std::uint64_t edt_clip_seed = 1;
  edt->add_option("--strategy", edt_strategy,
                  "pni | ddim-pni | ddim-inversion | mi-inpaint");
  edt->add_option("--k", edt_k, "masked-channel fraction");
  edt->add_option("--f-clamp", edt_fc, "clamp depth fraction");
  edt->add_option("--f-par", edt_fp, "noise fraction");
  edt->add_option("--target", edt_target, "target instrument");
  edt->add_option("--in", edt_in, "source clip json (default: sample one)");
  edt->add_option("--clip-seed", edt_clip_seed, "seed for the sampled source clip");
  edt->add_option("--frames", edt_frames, "frames for the sampled source clip");
  edt->add_option("--mi-frames", edt_mi_frames, "frames for the mask scores");
  edt->add_option("--out", edt_out, "output file name");

  auto* grd = app.add_subcommand("grid", "baselines plus the k x f_clamp grid");
  int grd_clips = 0, grd_mi_frames = 10000;
  grd->add_option("--clips", grd_clips, "paired clips (overrides config)");
  grd->add_option("--mi-frames", grd_mi_frames, "frames for the mask scores");

  auto* evl = app.add_subcommand("eval", "metrics for a stored edit result");
  std::string evl_edited, evl_source;
  int evl_target = -1;
  evl->add_option("--edited", evl_edited, "edit result json")->required();
  evl->add_option("--source", evl_source, "source clip json");
  evl->add_option("--target", evl_target, "target instrument");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!g.config_path.empty())
      g.config = nlohmann::json::parse(read_text_file(g.config_path));
    else
      g.config = nlohmann::json::object();
    if (seed_flag->count() > 0) g.seed = seed_opt;

    if (gen->parsed()) return cmd_gen_world(g, gen_clips, gen_frames);
    if (ami->parsed()) return cmd_analyze_mi(g, mi_n, mi_bins, mi_shuffles, mi_k);
    if (prb->parsed()) return cmd_probe(g, prb_mi_frames, prb_k);
    if (edt->parsed())
      return cmd_edit(g, edt_strategy, edt_k, edt_fc, edt_fp, edt_target,
                      edt_in, edt_clip_seed, edt_frames, edt_mi_frames, edt_out);
    if (grd->parsed()) return cmd_grid(g, grd_clips, grd_mi_frames);
    if (evl->parsed()) return cmd_eval(g, evl_edited, evl_source, evl_target);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
