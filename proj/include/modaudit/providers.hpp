#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "modaudit/errors.hpp"

namespace modaudit {

class ProviderError : public Error {
 public:
  using Error::Error;
};

class TextTooLong : public ProviderError {
 public:
  TextTooLong(std::size_t actual, std::size_t limit)
      : ProviderError("text of " + std::to_string(actual) +
                      " chars exceeds provider limit " + std::to_string(limit)),
        actual_chars(actual), limit_chars(limit) {}
  std::size_t actual_chars, limit_chars;
};

class MissingCredential : public ProviderError {
 public:
  explicit MissingCredential(const std::string& var)
      : ProviderError("credential environment variable " + var + " is not set"),
        env_var(var) {}
  std::string env_var;
};

class MalformedResponse : public ProviderError {
 public:
  explicit MalformedResponse(const std::string& detail)
      : ProviderError("malformed provider response: " + detail) {}
};

class ScoreOutOfRange : public ProviderError {
 public:
  ScoreOutOfRange(const std::string& cat, double value)
      : ProviderError("category '" + cat + "' score " + std::to_string(value) +
                      " outside [0,1]"),
        category(cat), score(value) {}
  std::string category;
  double score;
};

class MissingCategory : public ProviderError {
 public:
  explicit MissingCategory(const std::string& cat)
      : ProviderError("selected category '" + cat + "' absent from response"),
        category(cat) {}
  std::string category;
};

class UnknownProvider : public ProviderError {
 public:
  explicit UnknownProvider(const std::string& id)
      : ProviderError("no adapter registered for provider '" + id + "'"),
        provider_id(id) {}
  std::string provider_id;
};

// Static description of one moderation service.
struct ProviderSpec {
  std::string id;
  std::string display_name;
  double rate_limit = 1.0;                  // queries per second
  std::optional<std::size_t> max_text_chars;
  std::vector<std::string> category_names;  // sorted
  std::string auth_env_var;                 // empty = no credential needed
};

// One scored reply, normalized across providers. text_digest, latency_ms and
// retrieved_at are filled by the scheduler around the wire call; decoders
// fill provider_id, category_scores and model_version.
struct ProviderResponse {
  std::string provider_id;
  std::string text_digest;
  std::map<std::string, double> category_scores;
  double latency_ms = 0.0;
  double retrieved_at = 0.0;   // seconds since the active clock's epoch
  std::string model_version;   // verbatim version header when one is sent
};

// Which category scores feed the scalar verdict, and how they combine.
struct CategoryMapping {
  std::string provider_id;
  std::vector<std::string> selected_categories;  // non-empty
  std::string combiner = "max";
};

struct Verdict {
  double score = 0.0;
  double threshold = 0.5;
  bool is_flagged = false;  // always score >= threshold
};

// Deterministic offline classifier: clamp(base + sum of matched token
// weights), matching case-insensitively on word boundaries, every
// occurrence counted. The additivity makes it an exact oracle for the
// perturbation and attribution tests.
struct MockLexicon {
  double base_score = 0.1;
  std::map<std::string, double> token_weights;  // lowercase token -> weight
};

// A provider call before credential injection. Secrets never appear here:
// auth_env_var names the variable and auth_location says where the transport
// must place its value at send time.
struct WireRequest {
  std::string provider_id;
  std::string method;  // "POST"
  std::string host;
  std::string path;
  std::vector<std::pair<std::string, std::string>> headers;  // secret-free
  std::string body;    // canonical bytes, deterministic per (spec, text)
  std::string auth_env_var;       // empty = unauthenticated
  std::string auth_location;      // header name, or "query:<param>"
  std::string auth_value_prefix;  // e.g. "Bearer " for Authorization headers
};

struct WireReply {
  int status = 0;
  std::string body;
  std::map<std::string, std::string> headers;
};

// Builds the deterministic wire request for this provider. Verifies length
// limits and that the credential variable is set (without reading it into
// the request).
WireRequest encode_request(const ProviderSpec& spec, const std::string& text);

// Parses a success-status body into normalized category scores.
ProviderResponse decode_response(const ProviderSpec& spec,
                                 const std::string& body);

// Scalar verdict from selected categories (max combiner), flagged at
// score >= threshold.
Verdict to_verdict(const ProviderResponse& resp, const CategoryMapping& mapping,
                   double threshold);

// Offline scoring path shared by the mock transport and pure unit tests.
ProviderResponse mock_score(const MockLexicon& lex, const std::string& text);
double mock_score_value(const MockLexicon& lex, const std::string& text);

// Provider registry: specs plus per-provider category mappings from TOML.
class ProviderRegistry {
 public:
  static ProviderRegistry load(const std::filesystem::path& toml_file);

  const ProviderSpec& spec(const std::string& provider_id) const;
  // Mapping for (provider, dataset); dataset-specific entries override the
  // provider default.
  CategoryMapping mapping(const std::string& provider_id,
                          const std::string& dataset = "") const;
  std::vector<std::string> provider_ids() const;  // sorted

 private:
  std::map<std::string, ProviderSpec> specs_;
  std::map<std::string, CategoryMapping> default_mappings_;
  std::map<std::string, CategoryMapping> dataset_mappings_;  // "prov\x1f:ds"
};

// Cache / JSONL serialization of responses.
std::string response_to_json(const ProviderResponse& resp);
ProviderResponse response_from_json(std::string_view json_text);

}  // namespace modaudit
