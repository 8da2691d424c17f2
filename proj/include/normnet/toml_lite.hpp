#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

namespace normnet {

// Minimal TOML reader covering the config surface of this project: comments,
// [table] / [table.sub] headers, and key = value lines where value is a
// string, integer, float, boolean, or a single-line array of those.
nlohmann::json parse_toml_lite(const std::string& text);

/// Loads .toml via parse_toml_lite, anything else as JSON.
nlohmann::json load_config_file(const std::string& path);

}  // namespace normnet
