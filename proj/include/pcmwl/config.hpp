#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "pcmwl/engine.hpp"

namespace pcmwl {

/// Set one config key from its text value. Throws ConfigError naming the
/// key on an unknown key or a malformed value.
void apply_key(SimConfig& config, const std::string& key, const std::string& value);

/// Flat `key = value` lines, '#' starts a comment. Missing keys keep their
/// defaults. Syntax errors throw ParseError with the line number; the
/// resulting config is validated (ConfigError names the key).
SimConfig parse_config(std::istream& in);
SimConfig parse_config(const std::filesystem::path& path);

/// Every key accepted by apply_key.
const std::vector<std::string>& config_keys();

}  // namespace pcmwl
