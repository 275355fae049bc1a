#include "zigzag/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace zigzag {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (trim(s.substr(used)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: cannot parse number for " + what +
                              " from '" + s + "'");
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text,
                                            const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                    ": malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                  ": empty key");
    cfg.sections_[section][key] = value;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

bool KeyValueConfig::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string KeyValueConfig::get(const std::string& section,
                                const std::string& key) const {
  const auto s = sections_.find(section);
  if (s != sections_.end()) {
    const auto k = s->second.find(key);
    if (k != s->second.end()) return k->second;
  }
  throw std::invalid_argument(origin_ + ": missing key '" + key +
                              "' in section [" + section + "]");
}

std::string KeyValueConfig::get_or(const std::string& section,
                                   const std::string& key,
                                   const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double KeyValueConfig::get_double(const std::string& section,
                                  const std::string& key) const {
  return to_double(get(section, key), key);
}

double KeyValueConfig::get_double_or(const std::string& section,
                                     const std::string& key,
                                     double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::uint64_t KeyValueConfig::get_u64_or(const std::string& section,
                                         const std::string& key,
                                         std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key);
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: cannot parse integer for " + key +
                                " from '" + v + "'");
  }
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& section,
                                                    const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_string_list(section, key))
    out.push_back(to_double(item, key));
  return out;
}

std::vector<std::string> KeyValueConfig::get_string_list(
    const std::string& section, const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get(section, key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  if (out.empty())
    throw std::invalid_argument("config: empty list for key '" + key + "'");
  return out;
}

ZigZagState parse_start(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos)
    throw std::invalid_argument("start must be 'x,theta', e.g. -5,+1");
  ZigZagState s;
  s.x = to_double(trim(text.substr(0, comma)), "start position");
  const std::string th = trim(text.substr(comma + 1));
  if (th == "+1" || th == "1")
    s.theta = +1;
  else if (th == "-1")
    s.theta = -1;
  else
    throw std::invalid_argument("start velocity must be +1 or -1, got '" + th + "'");
  return s;
}

ExperimentFileConfig load_experiment_config(const KeyValueConfig& cfg) {
  const std::string sec = "experiment";
  ExperimentFileConfig out;
  out.base.target_tag = cfg.get_or(sec, "target", "cauchy");
  out.refresh_tags = cfg.has(sec, "refresh")
                         ? cfg.get_string_list(sec, "refresh")
                         : std::vector<std::string>{"zero"};
  out.base.initial = parse_start(cfg.get_or(sec, "start", "-5,+1"));
  out.base.horizon = cfg.get_double_or(sec, "horizon", 1e4);
  if (!(out.base.horizon > 0.0))
    throw std::invalid_argument("config: horizon must be > 0");
  const double reps = cfg.get_double_or(sec, "replicates", 1000);
  if (!(reps >= 1.0))
    throw std::invalid_argument("config: replicates must be >= 1");
  out.base.replicates = static_cast<std::size_t>(reps);
  out.base.seed = cfg.get_u64_or(sec, "seed", 0);
  out.base.query.threshold = cfg.get_double_or(sec, "threshold", 5.0);
  out.base.threads = static_cast<unsigned>(cfg.get_double_or(sec, "threads", 0));
  out.checkpoint_count =
      static_cast<std::size_t>(cfg.get_double_or(sec, "checkpoints", 200));
  if (out.checkpoint_count < 2)
    throw std::invalid_argument("config: checkpoints must be >= 2");
  const double t_lo = std::min(1.0, out.base.horizon / 2.0);
  out.base.checkpoints = log_checkpoints(t_lo, out.base.horizon, out.checkpoint_count);
  return out;
}

}  // namespace zigzag
