#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "modaudit/errors.hpp"
#include "modaudit/providers.hpp"

namespace modaudit {

class SchedulerError : public Error {
 public:
  using Error::Error;
};

// A cache line that cannot be trusted: truncated JSON, bad schema version,
// missing fields.
class CacheCorrupt : public SchedulerError {
 public:
  CacheCorrupt(std::size_t line, const std::string& detail)
      : SchedulerError("cache line " + std::to_string(line) + ": " + detail),
        line_no(line) {}
  std::size_t line_no;
};

// Injected time source. All scheduling logic sees time only through this, so
// rate and backoff behaviour is tested on virtual time.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;                  // seconds since the clock's epoch
  virtual void sleep_until(double when) = 0; // no-op when `when` <= now()
};

class SystemClock final : public Clock {
 public:
  double now() override;
  void sleep_until(double when) override;
};

// Virtual clock: sleeping advances time instantly.
class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(double start = 0.0) : now_(start) {}
  double now() override { return now_; }
  void sleep_until(double when) override {
    if (when > now_) now_ = when;
  }

 private:
  double now_;
};

// Network failure before any HTTP status was obtained (DNS, connect, TLS,
// socket reset). Always retryable.
class TransportUnavailable : public SchedulerError {
 public:
  using SchedulerError::SchedulerError;
};

// Executes one wire request. Implementations inject the credential named by
// the request at send time; it must never be written anywhere else.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual WireReply send(const WireRequest& request) = 0;
};

// Real HTTPS transport (one TLS client per host, created lazily).
class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(double timeout_seconds = 30.0);
  ~HttpTransport() override;
  WireReply send(const WireRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Offline transport scoring with the additive lexicon. Understands the mock
// wire schema only; replies can be scripted to fail for retry tests.
class MockTransport final : public Transport {
 public:
  explicit MockTransport(MockLexicon lexicon) : lexicon_(std::move(lexicon)) {}

  // Next `count` sends fail with the given status (0 = network failure).
  void script_failures(int count, int status) {
    scripted_failures_ = count;
    scripted_status_ = status;
  }

  WireReply send(const WireRequest& request) override;

  std::size_t calls() const { return calls_; }

 private:
  MockLexicon lexicon_;
  std::size_t calls_ = 0;
  int scripted_failures_ = 0;
  int scripted_status_ = 0;
};

// Issue-rate governor. Token bucket (capacity ceil(rate), refill rate/sec,
// starts full) combined with a sliding log of the last ceil(rate) grant
// times: a call is issued only when a token is available AND fewer than
// ceil(rate) grants happened in the trailing second. The log is what makes
// the per-window bound hold even for the initial full-bucket burst.
class RateLimiter {
 public:
  explicit RateLimiter(double rate_per_second);

  // Blocks on the clock until a grant is permitted; records the grant.
  void acquire(Clock& clock);

  double rate() const { return rate_; }
  std::size_t window_capacity() const { return capacity_; }

 private:
  double rate_;
  std::size_t capacity_;
  double tokens_;
  double last_refill_;
  bool started_ = false;
  std::deque<double> recent_grants_;
};

// Append-only JSONL response store, one file per provider, keyed by
// provider id + SHA-256 of the queried text. Defective lines are collected
// at open and skipped; strict mode throws CacheCorrupt on the first one.
class ResponseCache {
 public:
  struct Defect {
    std::size_t line_no;
    std::string detail;
  };

  ResponseCache(const std::filesystem::path& cache_dir,
                const std::string& provider_id, bool strict = false);

  static std::string key_for(const std::string& provider_id,
                             const std::string& text);

  bool contains(const std::string& key) const;
  std::optional<ProviderResponse> get(const std::string& key) const;
  void append(const std::string& key, const ProviderResponse& response);

  const std::vector<Defect>& defects() const { return defects_; }
  std::size_t size() const { return entries_.size(); }
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
  std::map<std::string, ProviderResponse> entries_;
  std::vector<Defect> defects_;
};

// One-shot strict lookup: opens the provider's cache file and returns the
// stored response for this text, if any. Throws CacheCorrupt when a
// defective line is encountered.
std::optional<ProviderResponse> cache_lookup(
    const std::filesystem::path& cache_dir, const std::string& provider_id,
    const std::string& text);

// Progress journal: JSONL of per-item outcomes, used for resume accounting
// and error summaries. The cache line is always written before the journal
// line, so a crash between the two re-serves the item from cache on resume.
struct JournalEntry {
  std::string id;
  bool ok = false;
  std::string error_kind;  // empty when ok
};

class Journal {
 public:
  Journal(const std::filesystem::path& cache_dir,
          const std::string& provider_id, bool resume);

  bool completed_ok(const std::string& id) const;
  void record(const JournalEntry& entry);
  std::size_t size() const { return by_id_.size(); }

 private:
  std::filesystem::path file_;
  std::map<std::string, JournalEntry> by_id_;
};

struct QueryJob {
  std::string provider_id;
  std::vector<std::pair<std::string, std::string>> items;  // (id, text)
  std::optional<double> rate_override;
  std::filesystem::path cache_dir;
};

enum class ItemErrorKind {
  auth_failed,
  malformed_response,
  retries_exhausted,
  rejected,          // non-retryable HTTP status other than auth
  text_too_long,
  missing_credential,
};

std::string_view item_error_kind_name(ItemErrorKind kind);

struct ItemOutcome {
  std::string id;
  std::optional<ProviderResponse> response;
  std::optional<ItemErrorKind> error;
  std::string error_detail;
  bool from_cache = false;
  int attempts = 0;  // network attempts made for this item
};

struct RunStats {
  std::size_t total = 0;
  std::size_t succeeded = 0;
  std::size_t from_cache = 0;
  std::size_t network_calls = 0;  // transport sends, including retries
  std::size_t failures = 0;
};

struct RunOptions {
  int max_attempts = 5;
  double backoff_base_seconds = 1.0;
  double backoff_factor = 2.0;
  bool resume = true;
};

// Resolves one text to a response or a terminal error: cache hit bypasses
// the limiter and transport entirely; otherwise the request is issued under
// the rate limiter and retried on transient failure (network error, 429,
// 5xx) with exponential backoff until max_attempts. Fresh responses are
// appended to the cache before the caller sees them. `outcome.id` is left
// empty for the caller to fill.
ItemOutcome fetch_one(const ProviderSpec& spec, const std::string& text,
                      ResponseCache& cache, RateLimiter& limiter, Clock& clock,
                      Transport& transport, const RunOptions& options,
                      RunStats& stats);

// Runs every item to exactly one outcome, in item order, journaling each.
// The job survives per-item terminal errors; only an unusable cache
// directory aborts it.
RunStats run_job(const QueryJob& job, const ProviderSpec& spec, Clock& clock,
                 Transport& transport, const RunOptions& options,
                 const std::function<void(const ItemOutcome&)>& sink);

// Scoring front-end for analyses that generate texts on the fly
// (counterfactual twins, masked coalitions). Same cache, limiter, and retry
// behaviour as a query job, shared across all calls for one provider.
class ScoreService {
 public:
  ScoreService(const ProviderSpec& spec, std::shared_ptr<Transport> transport,
               std::shared_ptr<Clock> clock,
               const std::filesystem::path& cache_dir,
               std::optional<double> rate_override, RunOptions options);

  // Throws SchedulerError naming the failure kind when the text cannot be
  // scored after retries.
  ProviderResponse fetch(const std::string& text);

  const RunStats& stats() const { return stats_; }

 private:
  ProviderSpec spec_;
  std::shared_ptr<Transport> transport_;
  std::shared_ptr<Clock> clock_;
  ResponseCache cache_;
  RateLimiter limiter_;
  RunOptions options_;
  RunStats stats_;
};

}  // namespace modaudit
