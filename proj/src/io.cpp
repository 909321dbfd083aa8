#include "retimbre/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace retimbre {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

nlohmann::json world_config_to_json(const WorldConfig& cfg) {
  return {{"channels", cfg.channels},
          {"instruments", cfg.instruments},
          {"pitches", cfg.pitches},
          {"clusters", cfg.clusters},
          {"tau", cfg.tau},
          {"entanglement", cfg.entanglement},
          {"timbre_scale", cfg.timbre_scale},
          {"cluster_scale", cfg.cluster_scale},
          {"fine_scale", cfg.fine_scale},
          {"shared_scale", cfg.shared_scale},
          {"shared_fine_scale", cfg.shared_fine_scale},
          {"interaction_scale", cfg.interaction_scale},
          {"leak_hi", cfg.leak_hi},
          {"leak_lo", cfg.leak_lo},
          {"mean_segment_frames", cfg.mean_segment_frames},
          {"seed", cfg.seed}};
}

WorldConfig world_config_from_json(const nlohmann::json& j) {
  WorldConfig cfg;
  apply_world_overrides(cfg, j);
  return cfg;
}

void apply_world_overrides(WorldConfig& cfg, const nlohmann::json& j) {
  if (j.contains("channels")) cfg.channels = j["channels"].get<int>();
  if (j.contains("instruments")) cfg.instruments = j["instruments"].get<int>();
  if (j.contains("pitches")) cfg.pitches = j["pitches"].get<int>();
  if (j.contains("clusters")) cfg.clusters = j["clusters"].get<int>();
  if (j.contains("tau")) cfg.tau = j["tau"].get<double>();
  if (j.contains("entanglement")) cfg.entanglement = j["entanglement"].get<double>();
  if (j.contains("timbre_scale")) cfg.timbre_scale = j["timbre_scale"].get<double>();
  if (j.contains("cluster_scale")) cfg.cluster_scale = j["cluster_scale"].get<double>();
  if (j.contains("fine_scale")) cfg.fine_scale = j["fine_scale"].get<double>();
  if (j.contains("shared_scale")) cfg.shared_scale = j["shared_scale"].get<double>();
  if (j.contains("shared_fine_scale"))
    cfg.shared_fine_scale = j["shared_fine_scale"].get<double>();
  if (j.contains("interaction_scale"))
    cfg.interaction_scale = j["interaction_scale"].get<double>();
  if (j.contains("leak_hi")) cfg.leak_hi = j["leak_hi"].get<double>();
  if (j.contains("leak_lo")) cfg.leak_lo = j["leak_lo"].get<double>();
  if (j.contains("mean_segment_frames"))
    cfg.mean_segment_frames = j["mean_segment_frames"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::runtime_error("matrix json must be a non-empty array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols)
      throw std::runtime_error("ragged matrix json");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

nlohmann::json clip_to_json(const Clip& clip) {
  return {{"instrument", clip.instrument},
          {"pitches", clip.pitches},
          {"frames", matrix_to_json(clip.frames)}};
}

Clip clip_from_json(const nlohmann::json& j) {
  Clip c;
  c.instrument = j.at("instrument").get<int>();
  c.pitches = j.at("pitches").get<std::vector<int>>();
  c.frames = matrix_from_json(j.at("frames"));
  return c;
}

std::string strategy_name(EditStrategy s) {
  switch (s) {
    case EditStrategy::kPni: return "pni";
    case EditStrategy::kDdimPni: return "ddim-pni";
    case EditStrategy::kDdimInversion: return "ddim-inversion";
    case EditStrategy::kMiInpaint: return "mi-inpaint";
  }
  throw std::logic_error("unknown strategy");
}

EditStrategy strategy_from_name(const std::string& name) {
  if (name == "pni") return EditStrategy::kPni;
  if (name == "ddim-pni") return EditStrategy::kDdimPni;
  if (name == "ddim-inversion") return EditStrategy::kDdimInversion;
  if (name == "mi-inpaint") return EditStrategy::kMiInpaint;
  throw std::runtime_error("unknown strategy: " + name);
}

nlohmann::json edit_config_to_json(const EditConfig& cfg) {
  return {{"strategy", strategy_name(cfg.strategy)},
          {"k", cfg.k},
          {"f_clamp", cfg.f_clamp},
          {"f_par", cfg.f_par},
          {"cfg_weight", cfg.cfg_weight},
          {"target_instrument", cfg.target_instrument},
          {"seed", cfg.seed}};
}

EditConfig edit_config_from_json(const nlohmann::json& j) {
  EditConfig cfg;
  if (j.contains("strategy"))
    cfg.strategy = strategy_from_name(j["strategy"].get<std::string>());
  if (j.contains("k")) cfg.k = j["k"].get<double>();
  if (j.contains("f_clamp")) cfg.f_clamp = j["f_clamp"].get<double>();
  if (j.contains("f_par")) cfg.f_par = j["f_par"].get<double>();
  if (j.contains("cfg_weight")) cfg.cfg_weight = j["cfg_weight"].get<double>();
  if (j.contains("target_instrument"))
    cfg.target_instrument = j["target_instrument"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  return cfg;
}

void apply_harness_overrides(HarnessConfig& cfg, const nlohmann::json& j) {
  if (j.contains("n_clips")) cfg.n_clips = j["n_clips"].get<int>();
  if (j.contains("frames_per_clip"))
    cfg.frames_per_clip = j["frames_per_clip"].get<int>();
  if (j.contains("k_grid")) cfg.k_grid = j["k_grid"].get<std::vector<double>>();
  if (j.contains("f_clamp_grid"))
    cfg.f_clamp_grid = j["f_clamp_grid"].get<std::vector<double>>();
  if (j.contains("f_par")) cfg.f_par = j["f_par"].get<double>();
  if (j.contains("cfg_weight")) cfg.cfg_weight = j["cfg_weight"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("max_parallel")) cfg.max_parallel = j["max_parallel"].get<int>();
}

void apply_probe_overrides(ProbeOptions& opts, const nlohmann::json& j) {
  if (j.contains("n_frames")) opts.n_frames = j["n_frames"].get<int>();
  if (j.contains("f_grid")) opts.f_grid = j["f_grid"].get<std::vector<double>>();
  if (j.contains("max_iterations")) opts.max_iterations = j["max_iterations"].get<int>();
  if (j.contains("l2")) opts.l2 = j["l2"].get<double>();
  if (j.contains("select_delta")) opts.select_delta = j["select_delta"].get<double>();
  if (j.contains("max_parallel")) opts.max_parallel = j["max_parallel"].get<int>();
  if (j.contains("seed")) opts.seed = j["seed"].get<std::uint64_t>();
}

}  // namespace retimbre
