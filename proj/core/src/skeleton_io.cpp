#include "zigzag/skeleton_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace zigzag {

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_skeleton_csv(std::ostream& out, const Skeleton& skeleton,
                        const SkeletonMeta& meta) {
  out << "# zigzag skeleton v1\n";
  out << "# target=" << meta.target << "\n";
  out << "# refresh=" << meta.refresh << "\n";
  out << "# seed=" << meta.seed << "\n";
  out << "# stream=" << meta.stream << "\n";
  out << "# horizon=" << format_g17(skeleton.horizon) << "\n";
  out << "# initial_x=" << format_g17(skeleton.initial.x) << "\n";
  out << "# initial_theta=" << (skeleton.initial.theta > 0 ? "+1" : "-1") << "\n";
  out << "time,kind,position\n";
  for (const auto& e : skeleton.events) {
    out << format_g17(e.time) << ','
        << (e.kind == EventKind::Bounce ? "bounce" : "refresh") << ','
        << format_g17(e.position) << '\n';
  }
}

void write_skeleton_csv(const std::string& path, const Skeleton& skeleton,
                        const SkeletonMeta& meta) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_skeleton_csv(out, skeleton, meta);
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

double parse_field(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(what);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("skeleton csv: bad ") + what + " '" + s + "'");
  }
}

}  // namespace

SkeletonFile read_skeleton_csv(std::istream& in) {
  SkeletonFile out;
  std::string line;
  bool have_header = false;
  bool have_theta = false, have_x = false, have_horizon = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      key.erase(key.find_last_not_of(' ') + 1);
      const auto value = line.substr(eq + 1);
      if (key == "target") out.meta.target = value;
      else if (key == "refresh") out.meta.refresh = value;
      else if (key == "seed") out.meta.seed = std::stoull(value);
      else if (key == "stream") out.meta.stream = std::stoull(value);
      else if (key == "horizon") { out.skeleton.horizon = parse_field(value, "horizon"); have_horizon = true; }
      else if (key == "initial_x") { out.skeleton.initial.x = parse_field(value, "initial_x"); have_x = true; }
      else if (key == "initial_theta") { out.skeleton.initial.theta = value == "+1" ? +1 : -1; have_theta = true; }
      continue;
    }
    if (!have_header) {
      if (line != "time,kind,position")
        throw std::runtime_error("skeleton csv: unexpected header '" + line + "'");
      have_header = true;
      continue;
    }
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::runtime_error("skeleton csv: malformed row '" + line + "'");
    SkeletonEvent e{};
    e.time = parse_field(line.substr(0, c1), "time");
    const auto kind = line.substr(c1 + 1, c2 - c1 - 1);
    if (kind == "bounce") e.kind = EventKind::Bounce;
    else if (kind == "refresh") e.kind = EventKind::Refresh;
    else throw std::runtime_error("skeleton csv: unknown event kind '" + kind + "'");
    e.position = parse_field(line.substr(c2 + 1), "position");
    out.skeleton.events.push_back(e);
  }
  if (!have_header || !have_theta || !have_x || !have_horizon)
    throw std::runtime_error("skeleton csv: incomplete preamble or missing header");
  return out;
}

SkeletonFile read_skeleton_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open skeleton csv: " + path);
  return read_skeleton_csv(in);
}

}  // namespace zigzag
