#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zigzag/experiments.hpp"

namespace zigzag {

/// Flat `key = value` text file with optional `[section]` headers and `#`
/// comments. Keys before any section header live in the "" section.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text,
                                     const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  /// Raw string lookup; throws std::invalid_argument when missing.
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;

  double get_double(const std::string& section, const std::string& key) const;
  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const;
  std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const;
  std::vector<double> get_double_list(const std::string& section,
                                      const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& section,
                                           const std::string& key) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::string origin_;
};

/// Parses "x,theta" (e.g. "-5,+1") into a state.
ZigZagState parse_start(const std::string& text);

struct ExperimentFileConfig {
  ExperimentConfig base;                // refresh_tag left empty
  std::vector<std::string> refresh_tags;  // one farm per policy
  std::size_t checkpoint_count = 200;   // log-spaced over [1, horizon]
};

/// Reads the [experiment] section into a config. The checkpoint grid
/// defaults to `checkpoints` log-spaced points over [1, horizon].
ExperimentFileConfig load_experiment_config(const KeyValueConfig& cfg);

}  // namespace zigzag
