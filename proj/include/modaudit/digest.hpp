#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace modaudit {

// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

// Digest of a file's raw contents. Throws modaudit::Error if unreadable.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace modaudit
