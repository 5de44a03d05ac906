#include "modaudit/providers.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include <nlohmann/json.hpp>

#include "modaudit/text.hpp"
#include "modaudit/toml_lite.hpp"

namespace modaudit {

using nlohmann::json;

namespace {

void require_credential(const ProviderSpec& spec) {
  if (spec.auth_env_var.empty()) return;
  const char* value = std::getenv(spec.auth_env_var.c_str());
  if (value == nullptr || *value == '\0') {
    throw MissingCredential(spec.auth_env_var);
  }
}

void check_length(const ProviderSpec& spec, const std::string& text) {
  if (spec.max_text_chars && text.size() > *spec.max_text_chars) {
    throw TextTooLong(text.size(), *spec.max_text_chars);
  }
}

double checked_score(const std::string& category, double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw ScoreOutOfRange(category, value);
  return value;
}

// ---- mock -----------------------------------------------------------------
// Request {"text": ...}; reply {"toxicity": score}. The schema is ours, so it
// stays as small as the tests need.

WireRequest encode_mock(const ProviderSpec& spec, const std::string& text) {
  WireRequest req;
  req.provider_id = spec.id;
  req.method = "POST";
  req.host = "mock.invalid";
  req.path = "/score";
  req.headers = {{"Content-Type", "application/json"}};
  req.body = json{{"text", text}}.dump();
  return req;
}

ProviderResponse decode_mock(const ProviderSpec& spec, const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("toxicity") ||
      !j.at("toxicity").is_number()) {
    throw MalformedResponse("mock reply must be {\"toxicity\": number}");
  }
  ProviderResponse resp;
  resp.provider_id = spec.id;
  resp.category_scores["toxicity"] =
      checked_score("toxicity", j.at("toxicity").get<double>());
  return resp;
}

// ---- openai ---------------------------------------------------------------
// POST /v1/moderations {"input": text}; bearer credential. Reply carries
// results[0].category_scores keyed by category name; slashes in upstream
// names are normalized to '_' (e.g. hate/threatening -> hate_threatening).

WireRequest encode_openai(const ProviderSpec& spec, const std::string& text) {
  WireRequest req;
  req.provider_id = spec.id;
  req.method = "POST";
  req.host = "api.openai.com";
  req.path = "/v1/moderations";
  req.headers = {{"Content-Type", "application/json"}};
  req.body = json{{"input", text}}.dump();
  req.auth_env_var = spec.auth_env_var;
  req.auth_location = "Authorization";
  req.auth_value_prefix = "Bearer ";
  return req;
}

std::string normalize_category(std::string name) {
  for (char& c : name) {
    if (c == '/' || c == '-' || c == ' ') c = '_';
    c = ascii_lower(c);
  }
  return name;
}

ProviderResponse decode_openai(const ProviderSpec& spec, const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw MalformedResponse("not a JSON object");
  if (!j.contains("results") || !j.at("results").is_array() ||
      j.at("results").empty()) {
    throw MalformedResponse("missing results[0]");
  }
  const json& first = j.at("results").front();
  if (!first.contains("category_scores") || !first.at("category_scores").is_object()) {
    throw MalformedResponse("missing category_scores");
  }
  ProviderResponse resp;
  resp.provider_id = spec.id;
  for (const auto& [name, value] : first.at("category_scores").items()) {
    if (!value.is_number()) throw MalformedResponse("score for " + name + " not numeric");
    std::string norm = normalize_category(name);
    if (!std::binary_search(spec.category_names.begin(),
                            spec.category_names.end(), norm)) {
      continue;  // unadvertised categories are ignored, not errors
    }
    resp.category_scores[norm] = checked_score(norm, value.get<double>());
  }
  return resp;
}

// ---- perspective ----------------------------------------------------------
// POST comments:analyze with requested attributes; key travels as a query
// parameter. Scores live at attributeScores.<NAME>.summaryScore.value.

WireRequest encode_perspective(const ProviderSpec& spec, const std::string& text) {
  WireRequest req;
  req.provider_id = spec.id;
  req.method = "POST";
  req.host = "commentanalyzer.googleapis.com";
  req.path = "/v1alpha1/comments:analyze";
  req.headers = {{"Content-Type", "application/json"}};
  json attributes = json::object();
  for (const std::string& cat : spec.category_names) {
    std::string upper = cat;
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    attributes[upper] = json::object();
  }
  req.body = json{{"comment", json{{"text", text}}},
                  {"requestedAttributes", attributes}}
                 .dump();
  req.auth_env_var = spec.auth_env_var;
  req.auth_location = "query:key";
  return req;
}

ProviderResponse decode_perspective(const ProviderSpec& spec,
                                    const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("attributeScores") ||
      !j.at("attributeScores").is_object()) {
    throw MalformedResponse("missing attributeScores");
  }
  ProviderResponse resp;
  resp.provider_id = spec.id;
  for (const auto& [name, node] : j.at("attributeScores").items()) {
    std::string norm = normalize_category(name);
    if (!std::binary_search(spec.category_names.begin(),
                            spec.category_names.end(), norm)) {
      continue;
    }
    if (!node.contains("summaryScore") || !node.at("summaryScore").contains("value") ||
        !node.at("summaryScore").at("value").is_number()) {
      throw MalformedResponse("attribute " + name + " lacks summaryScore.value");
    }
    resp.category_scores[norm] =
        checked_score(norm, node.at("summaryScore").at("value").get<double>());
  }
  return resp;
}

// ---- azure ----------------------------------------------------------------
// Text screen endpoint; subscription key header. Classification buckets
// Category1..3 map to sexually_explicit / sexually_suggestive / offensive.

WireRequest encode_azure(const ProviderSpec& spec, const std::string& text) {
  WireRequest req;
  req.provider_id = spec.id;
  req.method = "POST";
  req.host = "moderator.cognitive.microsoft.invalid";
  req.path = "/contentmoderator/moderate/v1.0/ProcessText/Screen?classify=True";
  req.headers = {{"Content-Type", "text/plain"}};
  req.body = text;
  req.auth_env_var = spec.auth_env_var;
  req.auth_location = "Ocp-Apim-Subscription-Key";
  return req;
}

ProviderResponse decode_azure(const ProviderSpec& spec, const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("Classification") ||
      !j.at("Classification").is_object()) {
    throw MalformedResponse("missing Classification");
  }
  static const std::pair<const char*, const char*> kBuckets[] = {
      {"Category1", "sexually_explicit"},
      {"Category2", "sexually_suggestive"},
      {"Category3", "offensive"},
  };
  ProviderResponse resp;
  resp.provider_id = spec.id;
  const json& cls = j.at("Classification");
  for (const auto& [bucket, category] : kBuckets) {
    if (!cls.contains(bucket)) continue;  // recorded absent
    const json& node = cls.at(bucket);
    if (!node.contains("Score") || !node.at("Score").is_number()) {
      throw MalformedResponse(std::string(bucket) + " lacks numeric Score");
    }
    resp.category_scores[category] =
        checked_score(category, node.at("Score").get<double>());
  }
  return resp;
}

// ---- google ---------------------------------------------------------------
// documents:moderateText; key as query parameter. Reply lists
// moderationCategories[{name, confidence}].

WireRequest encode_google(const ProviderSpec& spec, const std::string& text) {
  WireRequest req;
  req.provider_id = spec.id;
  req.method = "POST";
  req.host = "language.googleapis.com";
  req.path = "/v1/documents:moderateText";
  req.headers = {{"Content-Type", "application/json"}};
  req.body = json{{"document", json{{"type", "PLAIN_TEXT"}, {"content", text}}}}
                 .dump();
  req.auth_env_var = spec.auth_env_var;
  req.auth_location = "query:key";
  return req;
}

ProviderResponse decode_google(const ProviderSpec& spec, const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("moderationCategories") ||
      !j.at("moderationCategories").is_array()) {
    throw MalformedResponse("missing moderationCategories");
  }
  ProviderResponse resp;
  resp.provider_id = spec.id;
  for (const json& entry : j.at("moderationCategories")) {
    if (!entry.is_object() || !entry.contains("name") || !entry.contains("confidence") ||
        !entry.at("confidence").is_number()) {
      throw MalformedResponse("moderation category entry malformed");
    }
    std::string norm = normalize_category(entry.at("name").get<std::string>());
    if (!std::binary_search(spec.category_names.begin(),
                            spec.category_names.end(), norm)) {
      continue;
    }
    resp.category_scores[norm] =
        checked_score(norm, entry.at("confidence").get<double>());
  }
  return resp;
}

// ---- amazon ---------------------------------------------------------------
// Toxic-content detection; bearer-style credential header for parity with
// the other adapters (request signing is out of scope; fixtures drive tests).

WireRequest encode_amazon(const ProviderSpec& spec, const std::string& text) {
  WireRequest req;
  req.provider_id = spec.id;
  req.method = "POST";
  req.host = "comprehend.us-east-1.amazonaws.com";
  req.path = "/";
  req.headers = {{"Content-Type", "application/x-amz-json-1.1"},
                 {"X-Amz-Target", "Comprehend_20171127.DetectToxicContent"}};
  req.body = json{{"LanguageCode", "en"},
                  {"TextSegments", json::array({json{{"Text", text}}})}}
                 .dump();
  req.auth_env_var = spec.auth_env_var;
  req.auth_location = "Authorization";
  req.auth_value_prefix = "Bearer ";
  return req;
}

ProviderResponse decode_amazon(const ProviderSpec& spec, const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("ResultList") ||
      !j.at("ResultList").is_array() || j.at("ResultList").empty()) {
    throw MalformedResponse("missing ResultList[0]");
  }
  const json& first = j.at("ResultList").front();
  if (!first.contains("Labels") || !first.at("Labels").is_array()) {
    throw MalformedResponse("missing Labels");
  }
  ProviderResponse resp;
  resp.provider_id = spec.id;
  for (const json& label : first.at("Labels")) {
    if (!label.is_object() || !label.contains("Name") || !label.contains("Score") ||
        !label.at("Score").is_number()) {
      throw MalformedResponse("label entry malformed");
    }
    std::string norm = normalize_category(label.at("Name").get<std::string>());
    if (!std::binary_search(spec.category_names.begin(),
                            spec.category_names.end(), norm)) {
      continue;
    }
    resp.category_scores[norm] = checked_score(norm, label.at("Score").get<double>());
  }
  return resp;
}

struct Adapter {
  WireRequest (*encode)(const ProviderSpec&, const std::string&);
  ProviderResponse (*decode)(const ProviderSpec&, const std::string&);
};

const std::map<std::string, Adapter>& adapters() {
  static const std::map<std::string, Adapter> table = {
      {"mock", {encode_mock, decode_mock}},
      {"openai", {encode_openai, decode_openai}},
      {"perspective", {encode_perspective, decode_perspective}},
      {"azure", {encode_azure, decode_azure}},
      {"google", {encode_google, decode_google}},
      {"amazon", {encode_amazon, decode_amazon}},
  };
  return table;
}

const Adapter& adapter_for(const std::string& provider_id) {
  auto it = adapters().find(provider_id);
  if (it == adapters().end()) throw UnknownProvider(provider_id);
  return it->second;
}

}  // namespace

WireRequest encode_request(const ProviderSpec& spec, const std::string& text) {
  check_length(spec, text);
  require_credential(spec);
  return adapter_for(spec.id).encode(spec, text);
}

ProviderResponse decode_response(const ProviderSpec& spec,
                                 const std::string& body) {
  if (body.empty()) throw MalformedResponse("empty body");
  return adapter_for(spec.id).decode(spec, body);
}

Verdict to_verdict(const ProviderResponse& resp, const CategoryMapping& mapping,
                   double threshold) {
  if (mapping.selected_categories.empty()) {
    throw ConfigError("category mapping for " + mapping.provider_id +
                      " selects no categories");
  }
  double best = 0.0;
  bool first = true;
  for (const std::string& cat : mapping.selected_categories) {
    auto it = resp.category_scores.find(cat);
    if (it == resp.category_scores.end()) throw MissingCategory(cat);
    if (first || it->second > best) best = it->second;
    first = false;
  }
  Verdict v;
  v.score = best;
  v.threshold = threshold;
  v.is_flagged = best >= threshold;
  return v;
}

double mock_score_value(const MockLexicon& lex, const std::string& text) {
  double score = lex.base_score;
  for (const auto& [token, weight] : lex.token_weights) {
    score += weight * static_cast<double>(find_word_matches(text, token).size());
  }
  return std::clamp(score, 0.0, 1.0);
}

ProviderResponse mock_score(const MockLexicon& lex, const std::string& text) {
  ProviderResponse resp;
  resp.provider_id = "mock";
  resp.category_scores["toxicity"] = mock_score_value(lex, text);
  return resp;
}

ProviderRegistry ProviderRegistry::load(const std::filesystem::path& toml_file) {
  toml::Table table = toml::Table::parse_file(toml_file);
  ProviderRegistry reg;
  for (const std::string& id : table.children("providers")) {
    std::string base = "providers." + id;
    ProviderSpec spec;
    spec.id = id;
    spec.display_name = table.get_string_or(base + ".display_name", id);
    spec.rate_limit = table.get_double_or(base + ".rate_limit", 1.0);
    if (spec.rate_limit <= 0.0) {
      throw ConfigError("provider " + id + " rate_limit must be positive");
    }
    if (table.has(base + ".max_text_chars")) {
      std::int64_t limit = table.get_int(base + ".max_text_chars");
      if (limit <= 0) throw ConfigError("provider " + id + " max_text_chars must be positive");
      spec.max_text_chars = static_cast<std::size_t>(limit);
    }
    spec.category_names = table.get_string_array(base + ".categories");
    if (spec.category_names.empty()) {
      throw ConfigError("provider " + id + " lists no categories");
    }
    std::sort(spec.category_names.begin(), spec.category_names.end());
    spec.auth_env_var = table.get_string_or(base + ".auth_env_var", "");
    reg.specs_.emplace(id, std::move(spec));
  }
  if (reg.specs_.empty()) {
    throw ConfigError("provider registry " + toml_file.string() +
                      " defines no [providers.*] entries");
  }
  for (const std::string& id : table.children("mappings")) {
    const ProviderSpec& spec = reg.spec(id);
    auto validate = [&](CategoryMapping& m) {
      for (const std::string& cat : m.selected_categories) {
        if (!std::binary_search(spec.category_names.begin(),
                                spec.category_names.end(), cat)) {
          throw ConfigError("mapping for " + id + " selects unknown category '" +
                            cat + "'");
        }
      }
      if (m.selected_categories.empty()) {
        throw ConfigError("mapping for " + id + " selects no categories");
      }
    };
    std::string base = "mappings." + id;
    for (const std::string& key : table.children(base)) {
      CategoryMapping m;
      m.provider_id = id;
      m.selected_categories = table.get_string_array(base + "." + key);
      validate(m);
      if (key == "default") {
        reg.default_mappings_[id] = std::move(m);
      } else {
        reg.dataset_mappings_[id + "\x1f" + key] = std::move(m);
      }
    }
    if (!reg.default_mappings_.count(id)) {
      throw ConfigError("mapping table for " + id + " lacks a 'default' entry");
    }
  }
  // Providers without a mapping table select every advertised category.
  for (const auto& [id, spec] : reg.specs_) {
    if (!reg.default_mappings_.count(id)) {
      CategoryMapping m;
      m.provider_id = id;
      m.selected_categories = spec.category_names;
      reg.default_mappings_[id] = std::move(m);
    }
  }
  return reg;
}

const ProviderSpec& ProviderRegistry::spec(const std::string& provider_id) const {
  auto it = specs_.find(provider_id);
  if (it == specs_.end()) throw UnknownProvider(provider_id);
  return it->second;
}

CategoryMapping ProviderRegistry::mapping(const std::string& provider_id,
                                          const std::string& dataset) const {
  if (!dataset.empty()) {
    auto it = dataset_mappings_.find(provider_id + "\x1f" + dataset);
    if (it != dataset_mappings_.end()) return it->second;
  }
  auto it = default_mappings_.find(provider_id);
  if (it == default_mappings_.end()) throw UnknownProvider(provider_id);
  return it->second;
}

std::vector<std::string> ProviderRegistry::provider_ids() const {
  std::vector<std::string> out;
  out.reserve(specs_.size());
  for (const auto& [id, spec] : specs_) out.push_back(id);
  return out;
}

std::string response_to_json(const ProviderResponse& resp) {
  json scores = json::object();
  for (const auto& [name, value] : resp.category_scores) scores[name] = value;
  json j{{"provider_id", resp.provider_id},
         {"text_digest", resp.text_digest},
         {"category_scores", scores},
         {"latency_ms", resp.latency_ms},
         {"retrieved_at", resp.retrieved_at}};
  if (!resp.model_version.empty()) j["model_version"] = resp.model_version;
  return j.dump();
}

ProviderResponse response_from_json(std::string_view json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw MalformedResponse("stored response is not a JSON object");
  }
  ProviderResponse resp;
  if (!j.contains("provider_id") || !j.at("provider_id").is_string() ||
      !j.contains("category_scores") || !j.at("category_scores").is_object()) {
    throw MalformedResponse("stored response lacks required fields");
  }
  resp.provider_id = j.at("provider_id").get<std::string>();
  if (j.contains("text_digest") && j.at("text_digest").is_string()) {
    resp.text_digest = j.at("text_digest").get<std::string>();
  }
  for (const auto& [name, value] : j.at("category_scores").items()) {
    if (!value.is_number()) throw MalformedResponse("stored score not numeric");
    resp.category_scores[name] = checked_score(name, value.get<double>());
  }
  if (j.contains("latency_ms") && j.at("latency_ms").is_number()) {
    resp.latency_ms = j.at("latency_ms").get<double>();
  }
  if (j.contains("retrieved_at") && j.at("retrieved_at").is_number()) {
    resp.retrieved_at = j.at("retrieved_at").get<double>();
  }
  if (j.contains("model_version") && j.at("model_version").is_string()) {
    resp.model_version = j.at("model_version").get<std::string>();
  }
  return resp;
}

}  // namespace modaudit
