#pragma once

#include <string_view>

namespace modaudit {

inline constexpr std::string_view kToolName = "modaudit";
inline constexpr std::string_view kToolVersion = "0.1.0";

// Bumped whenever the cache line layout changes; mismatched entries are
// treated as defects and skipped rather than reinterpreted.
inline constexpr int kCacheSchemaVersion = 1;

}  // namespace modaudit
