#pragma once

#include <json.hpp>
#include <string>

#include "retimbre/edits.hpp"
#include "retimbre/grid.hpp"
#include "retimbre/probe.hpp"
#include "retimbre/world.hpp"

namespace retimbre {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

nlohmann::json world_config_to_json(const WorldConfig& cfg);
WorldConfig world_config_from_json(const nlohmann::json& j);

nlohmann::json clip_to_json(const Clip& clip);
Clip clip_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

nlohmann::json edit_config_to_json(const EditConfig& cfg);
EditConfig edit_config_from_json(const nlohmann::json& j);

std::string strategy_name(EditStrategy s);
EditStrategy strategy_from_name(const std::string& name);

// Overrides applied from a --config file; absent keys keep defaults.
void apply_world_overrides(WorldConfig& cfg, const nlohmann::json& j);
void apply_harness_overrides(HarnessConfig& cfg, const nlohmann::json& j);
void apply_probe_overrides(ProbeOptions& opts, const nlohmann::json& j);

}  // namespace retimbre
