#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "modaudit/errors.hpp"

namespace modaudit {

class CorpusError : public Error {
 public:
  using Error::Error;
};

// A record whose required fields are missing or ill-typed.
class MalformedRecord : public CorpusError {
 public:
  MalformedRecord(std::size_t line, const std::string& detail)
      : CorpusError("line " + std::to_string(line) + ": " + detail),
        line_no(line) {}
  std::size_t line_no;
};

// Several bad records reported together so a broken file surfaces every
// offending line in one pass.
class MalformedRecords : public CorpusError {
 public:
  MalformedRecords(std::vector<std::size_t> lines, const std::string& summary)
      : CorpusError(summary), line_nos(std::move(lines)) {}
  std::vector<std::size_t> line_nos;
};

class UnknownGroup : public CorpusError {
 public:
  explicit UnknownGroup(const std::string& tag)
      : CorpusError("unknown group tag '" + tag + "'"), group(tag) {}
  std::string group;
};

class DuplicateId : public CorpusError {
 public:
  explicit DuplicateId(const std::string& example_id)
      : CorpusError("duplicate example id '" + example_id + "'"),
        id(example_id) {}
  std::string id;
};

// A balancing stratum with zero examples of one label.
class EmptyStratum : public CorpusError {
 public:
  explicit EmptyStratum(const std::string& stratum)
      : CorpusError("stratum '" + stratum + "' lacks one label class"),
        name(stratum) {}
  std::string name;
};

// Identity-group vocabulary: ids plus display names, loaded from TOML
// ([groups] id = "Display Name"). Group tags on every example must resolve
// here, so typos fail at load rather than skewing slices silently.
class GroupRegistry {
 public:
  static GroupRegistry load(const std::filesystem::path& toml_file);
  static GroupRegistry from_ids(const std::vector<std::string>& ids);

  bool contains(std::string_view id) const;
  const std::string& display_name(const std::string& id) const;
  const std::vector<std::string>& ids() const { return ids_; }  // sorted

 private:
  std::vector<std::string> ids_;
  std::map<std::string, std::string> display_;
};

struct LabeledExample {
  std::string id;
  std::string text;
  int gold_label = 0;                     // 1 = hate, 0 = non-hate
  std::vector<int> annotator_labels;      // raw binary votes, may be empty
  std::vector<std::string> groups;        // sorted, unique, all registered
  std::string dataset;
};

enum class CorpusFormat { jsonl, csv };

enum class BalanceMode { aggregate, group };

// Immutable ordered collection of labeled examples. All transformations
// return new corpora; slices preserve the base ordering.
class Corpus {
 public:
  Corpus() = default;
  // Validates ids unique, labels binary, groups registered, text non-blank.
  Corpus(std::vector<LabeledExample> examples, const GroupRegistry& registry);

  static Corpus load(const std::filesystem::path& path, CorpusFormat format,
                     const GroupRegistry& registry);
  void save(const std::filesystem::path& path, CorpusFormat format) const;

  const std::vector<LabeledExample>& examples() const { return examples_; }
  std::size_t size() const { return examples_.size(); }
  bool empty() const { return examples_.empty(); }
  bool has_id(std::string_view id) const;
  const LabeledExample& by_id(std::string_view id) const;

  // Digest of the source file bytes; empty for in-memory corpora.
  const std::string& source_digest() const { return source_digest_; }
  const std::string& source_path() const { return source_path_; }

  Corpus group_slice(const std::string& group) const;  // throws UnknownGroup
  Corpus label_slice(int gold_label) const;
  Corpus dataset_slice(std::string_view dataset) const;

  // Keeps examples with >= min_annotators unanimous votes and rewrites
  // gold_label to the unanimous vote.
  Corpus filter_unanimous(std::size_t min_annotators) const;

  // Downsamples the majority label uniformly at random. aggregate mode
  // balances the whole corpus. group mode balances each group slice
  // independently and returns the union by id (untagged examples are kept
  // unchanged); with overlapping group memberships the union itself is a
  // convenience view and only balanced_group_slice gives the exact
  // per-analysis slice.
  Corpus balance(BalanceMode mode, std::uint64_t seed) const;

  // The per-group balanced slice used by group-level analyses.
  Corpus balanced_group_slice(const std::string& group,
                              std::uint64_t seed) const;

  const GroupRegistry& registry() const { return registry_; }

 private:
  Corpus keep_indices(const std::vector<std::size_t>& sorted_indices) const;

  std::vector<LabeledExample> examples_;
  GroupRegistry registry_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::string source_digest_;
  std::string source_path_;
};

// Convenience wrapper matching the external JSONL/CSV contract.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   const GroupRegistry& registry);

}  // namespace modaudit
