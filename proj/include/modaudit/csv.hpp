#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace modaudit {
namespace csv {

// Field quoting and record parsing per RFC 4180, with two liberties used by
// this project's own files: lines starting with '#' outside any record are
// metadata comments and are skipped, and a trailing newline is optional.

// Quotes the field iff it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

// One CSV record, no trailing newline.
std::string format_row(const std::vector<std::string>& fields);

// Parses full CSV content (quoted fields may span lines). Returns records
// in order; comment lines and a trailing blank line are dropped.
// Throws modaudit::Error on an unterminated quoted field.
std::vector<std::vector<std::string>> parse(std::string_view content);

// Convenience: parse(contents of file). Throws modaudit::Error if unreadable.
std::vector<std::vector<std::string>> parse_file(const std::string& path);

}  // namespace csv
}  // namespace modaudit
