#include "modaudit/scheduler.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "modaudit/digest.hpp"
#include "modaudit/version.hpp"

namespace modaudit {

using nlohmann::json;

double SystemClock::now() {
  auto t = std::chrono::system_clock::now().time_since_epoch();
  return std::chrono::duration<double>(t).count();
}

void SystemClock::sleep_until(double when) {
  double delta = when - now();
  if (delta > 0) {
    std::this_thread::sleep_for(std::chrono::duration<double>(delta));
  }
}

WireReply MockTransport::send(const WireRequest& request) {
  ++calls_;
  if (scripted_failures_ > 0) {
    --scripted_failures_;
    if (scripted_status_ == 0) {
      throw TransportUnavailable("scripted network failure");
    }
    return WireReply{scripted_status_, "scripted failure", {}};
  }
  json j = json::parse(request.body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("text") ||
      !j.at("text").is_string()) {
    return WireReply{400, "mock transport expects {\"text\": ...}", {}};
  }
  double score = mock_score_value(lexicon_, j.at("text").get<std::string>());
  return WireReply{200, json{{"toxicity", score}}.dump(), {}};
}

RateLimiter::RateLimiter(double rate_per_second)
    : rate_(rate_per_second),
      capacity_(static_cast<std::size_t>(std::ceil(rate_per_second))),
      tokens_(0.0),
      last_refill_(0.0) {
  if (!(rate_ > 0.0)) throw ConfigError("rate limit must be positive");
  if (capacity_ == 0) capacity_ = 1;
  tokens_ = static_cast<double>(capacity_);  // bucket starts full
}

void RateLimiter::acquire(Clock& clock) {
  if (!started_) {
    last_refill_ = clock.now();
    started_ = true;
  }
  while (true) {
    double now = clock.now();
    if (now > last_refill_) {
      tokens_ = std::min(static_cast<double>(capacity_),
                         tokens_ + (now - last_refill_) * rate_);
      last_refill_ = now;
    }
    double token_ready = tokens_ >= 1.0 ? now : now + (1.0 - tokens_) / rate_;
    double window_ready =
        recent_grants_.size() < capacity_ ? now : recent_grants_.front() + 1.0;
    double ready = std::max({now, token_ready, window_ready});
    if (ready > now) {
      clock.sleep_until(ready);
      continue;
    }
    tokens_ -= 1.0;
    recent_grants_.push_back(now);
    if (recent_grants_.size() > capacity_) recent_grants_.pop_front();
    return;
  }
}

ResponseCache::ResponseCache(const std::filesystem::path& cache_dir,
                             const std::string& provider_id, bool strict) {
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  if (ec) {
    throw SchedulerError("cannot create cache directory " + cache_dir.string() +
                         ": " + ec.message());
  }
  file_ = cache_dir / (provider_id + ".cache.jsonl");
  std::ifstream in(file_, std::ios::binary);
  if (!in) return;  // fresh cache
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto defect = [&](const std::string& detail) {
      if (strict) throw CacheCorrupt(line_no, detail);
      defects_.push_back({line_no, detail});
    };
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      defect("not a JSON object (truncated line?)");
      continue;
    }
    if (!j.contains("key") || !j.at("key").is_string() ||
        !j.contains("response") || !j.contains("schema_version")) {
      defect("missing key/response/schema_version");
      continue;
    }
    if (!j.at("schema_version").is_number_integer() ||
        j.at("schema_version").get<int>() != kCacheSchemaVersion) {
      defect("unsupported schema_version");
      continue;
    }
    try {
      ProviderResponse resp = response_from_json(j.at("response").dump());
      entries_[j.at("key").get<std::string>()] = std::move(resp);
    } catch (const ProviderError& e) {
      defect(e.what());
    }
  }
}

std::string ResponseCache::key_for(const std::string& provider_id,
                                   const std::string& text) {
  return provider_id + ":" + sha256_hex(text);
}

bool ResponseCache::contains(const std::string& key) const {
  return entries_.count(key) > 0;
}

std::optional<ProviderResponse> ResponseCache::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::append(const std::string& key,
                           const ProviderResponse& response) {
  std::ofstream out(file_, std::ios::binary | std::ios::app);
  if (!out) throw SchedulerError("cannot append to cache file " + file_.string());
  json line{{"key", key},
            {"response", json::parse(response_to_json(response))},
            {"schema_version", kCacheSchemaVersion}};
  out << line.dump() << '\n';
  out.flush();
  if (!out) throw SchedulerError("write to cache file " + file_.string() + " failed");
  entries_[key] = response;
}

std::optional<ProviderResponse> cache_lookup(
    const std::filesystem::path& cache_dir, const std::string& provider_id,
    const std::string& text) {
  ResponseCache cache(cache_dir, provider_id, /*strict=*/true);
  return cache.get(ResponseCache::key_for(provider_id, text));
}

Journal::Journal(const std::filesystem::path& cache_dir,
                 const std::string& provider_id, bool resume) {
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  if (ec) {
    throw SchedulerError("cannot create cache directory " + cache_dir.string() +
                         ": " + ec.message());
  }
  file_ = cache_dir / (provider_id + ".journal.jsonl");
  if (!resume) {
    std::ofstream truncate(file_, std::ios::binary | std::ios::trunc);
    return;
  }
  std::ifstream in(file_, std::ios::binary);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("id") ||
        !j.at("id").is_string() || !j.contains("ok") || !j.at("ok").is_boolean()) {
      continue;  // a torn journal line only costs a cache lookup on resume
    }
    JournalEntry entry;
    entry.id = j.at("id").get<std::string>();
    entry.ok = j.at("ok").get<bool>();
    if (j.contains("error_kind") && j.at("error_kind").is_string()) {
      entry.error_kind = j.at("error_kind").get<std::string>();
    }
    by_id_[entry.id] = entry;
  }
}

bool Journal::completed_ok(const std::string& id) const {
  auto it = by_id_.find(id);
  return it != by_id_.end() && it->second.ok;
}

void Journal::record(const JournalEntry& entry) {
  auto it = by_id_.find(entry.id);
  if (it != by_id_.end() && it->second.ok == entry.ok &&
      it->second.error_kind == entry.error_kind) {
    return;  // already journaled identically; keep completed reruns write-free
  }
  std::ofstream out(file_, std::ios::binary | std::ios::app);
  if (!out) throw SchedulerError("cannot append to journal " + file_.string());
  json j{{"id", entry.id}, {"ok", entry.ok}};
  if (!entry.error_kind.empty()) j["error_kind"] = entry.error_kind;
  out << j.dump() << '\n';
  by_id_[entry.id] = entry;
}

std::string_view item_error_kind_name(ItemErrorKind kind) {
  switch (kind) {
    case ItemErrorKind::auth_failed: return "auth_failed";
    case ItemErrorKind::malformed_response: return "malformed_response";
    case ItemErrorKind::retries_exhausted: return "retries_exhausted";
    case ItemErrorKind::rejected: return "rejected";
    case ItemErrorKind::text_too_long: return "text_too_long";
    case ItemErrorKind::missing_credential: return "missing_credential";
  }
  return "unknown";
}

namespace {

bool transient_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

bool auth_status(int status) { return status == 401 || status == 403; }

}  // namespace

ItemOutcome fetch_one(const ProviderSpec& spec, const std::string& text,
                      ResponseCache& cache, RateLimiter& limiter, Clock& clock,
                      Transport& transport, const RunOptions& options,
                      RunStats& stats) {
  ItemOutcome outcome;
  const std::string key = ResponseCache::key_for(spec.id, text);

  if (auto cached = cache.get(key)) {
    outcome.response = std::move(*cached);
    outcome.from_cache = true;
    ++stats.from_cache;
    ++stats.succeeded;
    return outcome;
  }

  WireRequest request;
  try {
    request = encode_request(spec, text);
  } catch (const TextTooLong& e) {
    outcome.error = ItemErrorKind::text_too_long;
    outcome.error_detail = e.what();
  } catch (const MissingCredential& e) {
    outcome.error = ItemErrorKind::missing_credential;
    outcome.error_detail = e.what();
  }
  if (outcome.error) {
    ++stats.failures;
    return outcome;
  }

  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    outcome.attempts = attempt;
    limiter.acquire(clock);
    double sent_at = clock.now();
    ++stats.network_calls;
    bool transient = false;
    std::string transient_detail;
    try {
      WireReply reply = transport.send(request);
      if (reply.status == 200) {
        ProviderResponse resp = decode_response(spec, reply.body);
        resp.text_digest = sha256_hex(text);
        resp.latency_ms = (clock.now() - sent_at) * 1000.0;
        resp.retrieved_at = clock.now();
        auto version = reply.headers.find("x-model-version");
        if (version != reply.headers.end()) resp.model_version = version->second;
        cache.append(key, resp);  // cache first, journal second
        outcome.response = std::move(resp);
      } else if (auth_status(reply.status)) {
        outcome.error = ItemErrorKind::auth_failed;
        outcome.error_detail = "HTTP " + std::to_string(reply.status);
      } else if (transient_status(reply.status)) {
        transient = true;
        transient_detail = "HTTP " + std::to_string(reply.status);
      } else {
        outcome.error = ItemErrorKind::rejected;
        outcome.error_detail = "HTTP " + std::to_string(reply.status);
      }
    } catch (const TransportUnavailable& e) {
      transient = true;
      transient_detail = e.what();
    } catch (const MalformedResponse& e) {
      outcome.error = ItemErrorKind::malformed_response;
      outcome.error_detail = e.what();
    } catch (const ScoreOutOfRange& e) {
      outcome.error = ItemErrorKind::malformed_response;
      outcome.error_detail = e.what();
    }

    if (outcome.response || outcome.error) break;
    if (transient) {
      if (attempt == options.max_attempts) {
        outcome.error = ItemErrorKind::retries_exhausted;
        outcome.error_detail = "after " + std::to_string(attempt) +
                               " attempts; last: " + transient_detail;
        break;
      }
      double delay = options.backoff_base_seconds *
                     std::pow(options.backoff_factor, attempt - 1);
      clock.sleep_until(clock.now() + delay);
    }
  }

  if (outcome.response) {
    ++stats.succeeded;
  } else {
    ++stats.failures;
  }
  return outcome;
}

RunStats run_job(const QueryJob& job, const ProviderSpec& spec, Clock& clock,
                 Transport& transport, const RunOptions& options,
                 const std::function<void(const ItemOutcome&)>& sink) {
  if (spec.id != job.provider_id) {
    throw ConfigError("job provider '" + job.provider_id +
                      "' does not match spec '" + spec.id + "'");
  }
  {
    std::map<std::string, bool> seen;
    for (const auto& [id, text] : job.items) {
      if (!seen.emplace(id, true).second) {
        throw SchedulerError("duplicate item id '" + id + "' in job");
      }
    }
  }
  ResponseCache cache(job.cache_dir, spec.id);
  Journal journal(job.cache_dir, spec.id, options.resume);
  RateLimiter limiter(job.rate_override.value_or(spec.rate_limit));

  RunStats stats;
  stats.total = job.items.size();

  for (const auto& [id, text] : job.items) {
    ItemOutcome outcome =
        fetch_one(spec, text, cache, limiter, clock, transport, options, stats);
    outcome.id = id;
    if (outcome.response) {
      journal.record({id, true, ""});
    } else {
      journal.record(
          {id, false, std::string(item_error_kind_name(*outcome.error))});
    }
    sink(outcome);
  }
  return stats;
}

ScoreService::ScoreService(const ProviderSpec& spec,
                           std::shared_ptr<Transport> transport,
                           std::shared_ptr<Clock> clock,
                           const std::filesystem::path& cache_dir,
                           std::optional<double> rate_override,
                           RunOptions options)
    : spec_(spec),
      transport_(std::move(transport)),
      clock_(std::move(clock)),
      cache_(cache_dir, spec.id),
      limiter_(rate_override.value_or(spec.rate_limit)),
      options_(options) {}

ProviderResponse ScoreService::fetch(const std::string& text) {
  ItemOutcome outcome = fetch_one(spec_, text, cache_, limiter_, *clock_,
                                  *transport_, options_, stats_);
  if (!outcome.response) {
    throw SchedulerError(std::string(item_error_kind_name(*outcome.error)) +
                         ": " + outcome.error_detail);
  }
  return std::move(*outcome.response);
}

}  // namespace modaudit
