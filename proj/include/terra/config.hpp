#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "terra/sim.hpp"

namespace terra {

/// One `key = value` line of a config file.
struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Splits a config file into entries. Syntax: `[section]` headers,
/// `key = value` lines, `#` comments, blank lines. Throws ParseError.
std::vector<ConfigEntry> parse_config(std::istream& in);

/// Sets one key on a task. Angles are raw radians except the terrain
/// `*_deg` keys. Throws ConfigError for unknown keys or unparsable values.
void apply_setting(TaskSpec& spec, const std::string& section, const std::string& key,
                   const std::string& value);

/// Applies `section.key=value`.
void apply_override(TaskSpec& spec, const std::string& assignment);

/// Applies every entry on top of `base` and validates the result. Errors
/// carry the offending line number.
TaskSpec load_config(std::istream& in, TaskSpec base);
TaskSpec load_config_file(const std::string& path, TaskSpec base);

/// Every effective value, one section per parameter group. Loading the
/// dump on top of any base reproduces the same spec exactly.
void dump_config(std::ostream& out, const TaskSpec& spec);
std::string dump_config(const TaskSpec& spec);

/// "section.key" for every dumped key, in dump order.
std::vector<std::string> config_keys();

/// Reads `run.task` from a config file without applying anything else;
/// empty when the file does not set it.
std::string config_task_name(const std::vector<ConfigEntry>& entries);

}  // namespace terra
