#include "modaudit/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace modaudit {
namespace toml {

namespace {

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Removes a trailing comment, respecting double-quoted strings.
std::string_view strip_comment(std::string_view line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_quotes = !in_quotes;
    if (c == '#' && !in_quotes) return line.substr(0, i);
  }
  return line;
}

bool valid_bare_key(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

class Cursor {
 public:
  Cursor(std::string_view text, const std::string& source, std::size_t line)
      : text_(text), source_(source), line_(line) {}

  // Skips whitespace and '#' comments (each comment runs to end of line).
  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (c == '\n') ++line_;
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }
  bool done() { return pos_ >= text_.size(); }
  char peek() { return text_[pos_]; }
  char take() { return text_[pos_++]; }
  [[noreturn]] void fail(const std::string& detail) {
    throw ParseError(source_, line_, detail);
  }

  std::string parse_string() {
    if (take() != '"') fail("expected opening quote");
    std::string out;
    while (!done()) {
      char c = take();
      if (c == '"') return out;
      if (c == '\n') fail("newline inside string");
      if (c == '\\') {
        if (done()) break;
        char esc = take();
        switch (esc) {
          case '\\': out.push_back('\\'); break;
          case '"': out.push_back('"'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          default: fail(std::string("unsupported escape \\") + esc);
        }
      } else {
        out.push_back(c);
      }
    }
    fail("unterminated string");
  }

  Value parse_scalar() {
    char c = peek();
    if (c == '"') {
      Value v;
      v.kind = Value::Kind::String;
      v.str = parse_string();
      return v;
    }
    // bare token: number or boolean
    std::size_t start = pos_;
    while (!done() && text_[pos_] != ',' && text_[pos_] != ']' &&
           text_[pos_] != '\n' && text_[pos_] != '#') {
      ++pos_;
    }
    std::string token{trim(text_.substr(start, pos_ - start))};
    if (token.empty()) fail("empty value");
    Value v;
    if (token == "true" || token == "false") {
      v.kind = Value::Kind::Boolean;
      v.boolean = token == "true";
      return v;
    }
    bool looks_float = token.find_first_of(".eE") != std::string::npos;
    if (!looks_float) {
      std::int64_t n = 0;
      auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), n);
      if (ec == std::errc() && p == token.data() + token.size()) {
        v.kind = Value::Kind::Integer;
        v.integer = n;
        return v;
      }
    }
    try {
      std::size_t used = 0;
      double d = std::stod(token, &used);
      if (used == token.size()) {
        v.kind = Value::Kind::Float;
        v.real = d;
        return v;
      }
    } catch (const std::exception&) {
      // falls through to the failure below
    }
    fail("cannot parse value '" + token + "'");
  }

  Value parse_value() {
    skip_ws();
    if (done()) fail("missing value");
    if (peek() == '[') {
      take();
      Value v;
      v.kind = Value::Kind::Array;
      skip_ws();
      if (!done() && peek() == ']') {
        take();
        return v;
      }
      while (true) {
        skip_ws();
        v.array.push_back(parse_scalar());
        skip_ws();
        if (done()) fail("unterminated array");
        char c = take();
        if (c == ']') break;
        if (c != ',') fail("expected ',' or ']' in array");
        skip_ws();
        if (!done() && peek() == ']') {  // trailing comma
          take();
          break;
        }
      }
      return v;
    }
    return parse_scalar();
  }

  std::size_t line() const { return line_; }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view text_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

}  // namespace

double Value::as_double() const {
  if (kind == Kind::Float) return real;
  if (kind == Kind::Integer) return static_cast<double>(integer);
  throw ConfigError("toml: value is not numeric");
}

Table Table::parse(std::string_view content, const std::string& source_name) {
  Table table;
  table.source_ = source_name;
  std::string prefix;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t eol = content.find('\n', pos);
    bool last = eol == std::string_view::npos;
    std::string_view raw = content.substr(pos, last ? content.size() - pos : eol - pos);
    ++line_no;
    std::string_view line = trim(strip_comment(raw));
    if (line.empty()) {
      if (last) break;
      pos = eol + 1;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ParseError(source_name, line_no, "malformed table header");
      }
      std::string_view name = trim(line.substr(1, line.size() - 2));
      if (name.front() == '[') {
        throw ParseError(source_name, line_no, "arrays of tables are not supported");
      }
      if (!valid_bare_key(name)) {
        throw ParseError(source_name, line_no, "invalid table name");
      }
      prefix = std::string(name);
      if (last) break;
      pos = eol + 1;
      continue;
    }
    std::size_t eq = std::string_view::npos;
    {
      bool in_quotes = false;
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_quotes = !in_quotes;
        if (line[i] == '=' && !in_quotes) {
          eq = i;
          break;
        }
      }
    }
    if (eq == std::string_view::npos) {
      throw ParseError(source_name, line_no, "expected 'key = value'");
    }
    std::string_view key_part = trim(line.substr(0, eq));
    std::string key;
    if (!key_part.empty() && key_part.front() == '"') {
      Cursor kc(key_part, source_name, line_no);
      key = kc.parse_string();
    } else {
      if (!valid_bare_key(key_part)) {
        throw ParseError(source_name, line_no,
                         "invalid key '" + std::string(key_part) + "'");
      }
      key = std::string(key_part);
    }
    // A value may continue over following lines (multi-line array), so hand
    // the cursor the rest of the document from the '=' onward.
    std::size_t value_begin = pos + (line.data() - raw.data()) + eq + 1;
    std::string_view rest = content.substr(value_begin);
    Cursor cursor(rest, source_name, line_no);
    Value value = cursor.parse_value();
    std::string full_key = prefix.empty() ? key : prefix + "." + key;
    if (table.values_.count(full_key)) {
      throw ParseError(source_name, line_no, "duplicate key '" + full_key + "'");
    }
    table.values_.emplace(std::move(full_key), std::move(value));
    // Continue after the consumed value.
    pos = value_begin + cursor.pos();
    line_no = cursor.line() - 1;  // loop's ++line_no re-adds the current line
    std::size_t next_eol = content.find('\n', pos);
    if (next_eol == std::string_view::npos) break;
    // Anything left on the value's closing line must be a comment.
    std::string_view tail = trim(strip_comment(content.substr(pos, next_eol - pos)));
    if (!tail.empty()) {
      throw ParseError(source_name, cursor.line(), "trailing content after value");
    }
    pos = next_eol + 1;
    line_no = cursor.line();
  }
  return table;
}

Table Table::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("toml: cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.filename().string());
}

const Value& Table::at(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw ConfigError("toml: missing key '" + key + "' in " + source_);
  }
  return it->second;
}

std::string Table::get_string(const std::string& key) const {
  const Value& v = at(key);
  if (v.kind != Value::Kind::String) {
    throw ConfigError("toml: key '" + key + "' is not a string");
  }
  return v.str;
}

std::string Table::get_string_or(const std::string& key,
                                 std::string fallback) const {
  return has(key) ? get_string(key) : std::move(fallback);
}

double Table::get_double(const std::string& key) const {
  return at(key).as_double();
}

double Table::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t Table::get_int(const std::string& key) const {
  const Value& v = at(key);
  if (v.kind != Value::Kind::Integer) {
    throw ConfigError("toml: key '" + key + "' is not an integer");
  }
  return v.integer;
}

std::int64_t Table::get_int_or(const std::string& key,
                               std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool Table::get_bool_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const Value& v = at(key);
  if (v.kind != Value::Kind::Boolean) {
    throw ConfigError("toml: key '" + key + "' is not a boolean");
  }
  return v.boolean;
}

std::vector<std::string> Table::get_string_array(const std::string& key) const {
  const Value& v = at(key);
  if (v.kind != Value::Kind::Array) {
    throw ConfigError("toml: key '" + key + "' is not an array");
  }
  std::vector<std::string> out;
  out.reserve(v.array.size());
  for (const Value& item : v.array) {
    if (item.kind != Value::Kind::String) {
      throw ConfigError("toml: key '" + key + "' has a non-string element");
    }
    out.push_back(item.str);
  }
  return out;
}

std::vector<std::string> Table::children(const std::string& prefix) const {
  std::vector<std::string> out;
  std::string want = prefix.empty() ? "" : prefix + ".";
  for (const auto& [key, value] : values_) {
    if (key.size() <= want.size() || key.compare(0, want.size(), want) != 0) {
      continue;
    }
    std::string rest = key.substr(want.size());
    std::size_t dot = rest.find('.');
    std::string child = dot == std::string::npos ? rest : rest.substr(0, dot);
    if (out.empty() || out.back() != child) out.push_back(child);
  }
  return out;
}

}  // namespace toml
}  // namespace modaudit
