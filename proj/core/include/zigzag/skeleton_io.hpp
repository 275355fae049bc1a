#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "zigzag/pdmp.hpp"

namespace zigzag {

/// Provenance recorded in the CSV preamble.
struct SkeletonMeta {
  std::string target;
  std::string refresh;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Writes the skeleton as CSV with header `time,kind,position` preceded by
/// a `#`-prefixed metadata preamble. All numeric fields use 17 significant
/// digits, so a write/read/write cycle is byte-identical.
void write_skeleton_csv(std::ostream& out, const Skeleton& skeleton,
                        const SkeletonMeta& meta);
void write_skeleton_csv(const std::string& path, const Skeleton& skeleton,
                        const SkeletonMeta& meta);

struct SkeletonFile {
  Skeleton skeleton;
  SkeletonMeta meta;
};

/// Parses a skeleton CSV produced by write_skeleton_csv. Throws
/// std::runtime_error on malformed input.
SkeletonFile read_skeleton_csv(std::istream& in);
SkeletonFile read_skeleton_csv(const std::string& path);

/// printf("%.17g") as a std::string; the common serialization for every
/// numeric CSV field in this project.
std::string format_g17(double v);

}  // namespace zigzag
