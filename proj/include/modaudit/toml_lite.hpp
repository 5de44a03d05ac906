#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "modaudit/errors.hpp"

namespace modaudit {
namespace toml {

// Parser for the TOML subset this project's config files use:
//   - `[table]` and `[dotted.table]` headers
//   - `key = value` with bare or double-quoted keys
//   - values: "string" (escapes \\ \" \n \t), integer, float, true/false,
//     and single- or multi-line arrays of those scalars
//   - `#` comments and blank lines
// Keys are stored flattened as "table.subtable.key". No date-times, inline
// tables or arrays-of-tables; a file using those fails loudly.

class ParseError : public ConfigError {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& detail)
      : ConfigError(source + ":" + std::to_string(line) + ": " + detail),
        line_no(line) {}
  std::size_t line_no;
};

struct Value {
  enum class Kind { String, Integer, Float, Boolean, Array };
  Kind kind = Kind::String;
  std::string str;
  std::int64_t integer = 0;
  double real = 0.0;
  bool boolean = false;
  std::vector<Value> array;

  // Numeric accessor that accepts either integer or float.
  double as_double() const;
};

class Table {
 public:
  static Table parse(std::string_view content, const std::string& source_name);
  static Table parse_file(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const Value& at(const std::string& key) const;  // throws ConfigError if absent

  std::string get_string(const std::string& key) const;
  std::string get_string_or(const std::string& key, std::string fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int_or(const std::string& key, std::int64_t fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  std::vector<std::string> get_string_array(const std::string& key) const;

  // Immediate child names under a dotted prefix, e.g. keys and subtables
  // directly below "providers". Sorted, deduplicated.
  std::vector<std::string> children(const std::string& prefix) const;

  const std::map<std::string, Value>& entries() const { return values_; }

 private:
  std::map<std::string, Value> values_;
  std::string source_;
};

}  // namespace toml
}  // namespace modaudit
