#pragma once

#include <stdexcept>
#include <string>

namespace modaudit {

// Root of every exception this library throws on purpose. Modules derive
// specific types so callers can catch narrowly; the message is always
// human-readable and self-contained.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Bad run configuration (manifest, registry, flags). The CLI maps these to
// exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace modaudit
