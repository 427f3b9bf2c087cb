#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "nrc/harness.hpp"

namespace nrc {

/// Flat "section.key" -> value view of an ExperimentConfig.
using KeyMap = std::map<std::string, std::string>;

/// Parses `[section]` headers and `key = value` lines. `#` starts a comment,
/// values may be quoted, and `[a, b]` arrays become "a,b".
KeyMap parse_config_text(std::string_view text, const std::string& origin = "<config>");

/// Reads a config file. A `.json` file is taken to be run metadata and its
/// "config" object is used.
KeyMap read_config_file(const std::string& path);

/// Applies keys on top of `config`. Unknown keys and bad values throw ConfigError.
void apply_keys(ExperimentConfig& config, const KeyMap& keys);
ExperimentConfig config_from_keys(const KeyMap& keys);

/// Every key with its resolved value; round-trips through config_from_keys.
KeyMap config_to_keys(const ExperimentConfig& config);

/// Renders keys grouped by section in the same format parse_config_text reads.
std::string format_config(const KeyMap& keys);

const std::vector<std::string>& preset_names();
/// Keys of a named preset; throws ConfigError for unknown names.
KeyMap preset(std::string_view name);

}  // namespace nrc
