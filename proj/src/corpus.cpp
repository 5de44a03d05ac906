#include "modaudit/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "modaudit/csv.hpp"
#include "modaudit/digest.hpp"
#include "modaudit/rng.hpp"
#include "modaudit/toml_lite.hpp"

namespace modaudit {

using nlohmann::json;

GroupRegistry GroupRegistry::load(const std::filesystem::path& toml_file) {
  toml::Table table = toml::Table::parse_file(toml_file);
  GroupRegistry reg;
  for (const std::string& id : table.children("groups")) {
    reg.ids_.push_back(id);
    reg.display_[id] = table.get_string("groups." + id);
  }
  if (reg.ids_.empty()) {
    throw ConfigError("group registry " + toml_file.string() +
                      " defines no [groups] entries");
  }
  std::sort(reg.ids_.begin(), reg.ids_.end());
  return reg;
}

GroupRegistry GroupRegistry::from_ids(const std::vector<std::string>& ids) {
  GroupRegistry reg;
  reg.ids_ = ids;
  std::sort(reg.ids_.begin(), reg.ids_.end());
  reg.ids_.erase(std::unique(reg.ids_.begin(), reg.ids_.end()), reg.ids_.end());
  for (const std::string& id : reg.ids_) reg.display_[id] = id;
  return reg;
}

bool GroupRegistry::contains(std::string_view id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

const std::string& GroupRegistry::display_name(const std::string& id) const {
  auto it = display_.find(id);
  if (it == display_.end()) throw UnknownGroup(id);
  return it->second;
}

namespace {

bool blank(std::string_view s) {
  for (char c : s) {
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r') return false;
  }
  return true;
}

// Vocabulary problems (unregistered group tags) throw UnknownGroup at once:
// they are configuration-level mistakes. Structural problems are collected
// so a broken file reports every bad line in one pass.
void validate_example(const LabeledExample& ex, std::size_t line,
                      const GroupRegistry& registry,
                      std::vector<std::size_t>& bad_lines,
                      std::string& first_detail) {
  for (const std::string& g : ex.groups) {
    if (!registry.contains(g)) throw UnknownGroup(g);
  }
  auto reject = [&](const std::string& detail) {
    bad_lines.push_back(line);
    if (first_detail.empty()) {
      first_detail = "line " + std::to_string(line) + ": " + detail;
    }
  };
  if (ex.id.empty()) return reject("empty id");
  if (blank(ex.text)) return reject("text is empty after trimming");
  if (ex.gold_label != 0 && ex.gold_label != 1) {
    return reject("gold_label must be 0 or 1");
  }
  for (int vote : ex.annotator_labels) {
    if (vote != 0 && vote != 1) return reject("annotator vote must be 0 or 1");
  }
}

void canonicalize_groups(LabeledExample& ex) {
  std::sort(ex.groups.begin(), ex.groups.end());
  ex.groups.erase(std::unique(ex.groups.begin(), ex.groups.end()),
                  ex.groups.end());
}

LabeledExample example_from_json(const json& j, std::size_t line) {
  if (!j.is_object()) throw MalformedRecord(line, "record is not an object");
  LabeledExample ex;
  if (!j.contains("text") || !j.at("text").is_string()) {
    throw MalformedRecord(line, "missing or non-string field 'text'");
  }
  if (!j.contains("gold_label") || !j.at("gold_label").is_number_integer()) {
    throw MalformedRecord(line, "missing or non-integer field 'gold_label'");
  }
  ex.text = j.at("text").get<std::string>();
  ex.gold_label = j.at("gold_label").get<int>();
  if (j.contains("id")) {
    if (!j.at("id").is_string()) throw MalformedRecord(line, "field 'id' must be a string");
    ex.id = j.at("id").get<std::string>();
  }
  if (ex.id.empty()) ex.id = "line" + std::to_string(line);
  if (j.contains("annotator_labels")) {
    if (!j.at("annotator_labels").is_array()) {
      throw MalformedRecord(line, "field 'annotator_labels' must be an array");
    }
    for (const json& v : j.at("annotator_labels")) {
      if (!v.is_number_integer()) {
        throw MalformedRecord(line, "annotator vote must be an integer");
      }
      ex.annotator_labels.push_back(v.get<int>());
    }
  }
  if (j.contains("groups")) {
    if (!j.at("groups").is_array()) {
      throw MalformedRecord(line, "field 'groups' must be an array");
    }
    for (const json& v : j.at("groups")) {
      if (!v.is_string()) throw MalformedRecord(line, "group tag must be a string");
      ex.groups.push_back(v.get<std::string>());
    }
  }
  if (j.contains("dataset")) {
    if (!j.at("dataset").is_string()) {
      throw MalformedRecord(line, "field 'dataset' must be a string");
    }
    ex.dataset = j.at("dataset").get<std::string>();
  }
  canonicalize_groups(ex);
  return ex;
}

std::vector<std::string> split_groups_field(const std::string& field) {
  std::vector<std::string> out;
  std::string current;
  for (char c : field) {
    if (c == ';') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

}  // namespace

Corpus::Corpus(std::vector<LabeledExample> examples,
               const GroupRegistry& registry)
    : examples_(std::move(examples)), registry_(registry) {
  std::vector<std::size_t> bad_lines;
  std::string first_detail;
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    canonicalize_groups(examples_[i]);
    validate_example(examples_[i], i + 1, registry_, bad_lines, first_detail);
  }
  if (bad_lines.size() == 1) {
    throw MalformedRecord(bad_lines.front(), first_detail);
  }
  if (bad_lines.size() > 1) {
    std::ostringstream msg;
    msg << bad_lines.size() << " malformed records (lines";
    for (std::size_t line : bad_lines) msg << ' ' << line;
    msg << "); first: " << first_detail;
    throw MalformedRecords(std::move(bad_lines), msg.str());
  }
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    auto [it, inserted] = index_.emplace(examples_[i].id, i);
    if (!inserted) throw DuplicateId(examples_[i].id);
  }
}

Corpus Corpus::load(const std::filesystem::path& path, CorpusFormat format,
                    const GroupRegistry& registry) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read corpus file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string content = buf.str();

  std::vector<LabeledExample> examples;
  std::vector<std::size_t> bad_lines;
  std::string first_detail;

  if (format == CorpusFormat::jsonl) {
    std::istringstream lines(content);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
      ++line_no;
      if (blank(line)) continue;
      try {
        json j = json::parse(line);
        examples.push_back(example_from_json(j, line_no));
      } catch (const MalformedRecord& e) {
        bad_lines.push_back(line_no);
        if (first_detail.empty()) first_detail = e.what();
      } catch (const json::exception& e) {
        bad_lines.push_back(line_no);
        if (first_detail.empty()) {
          first_detail =
              "line " + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")";
        }
      }
    }
  } else {
    auto rows = csv::parse(content);
    if (rows.empty()) throw CorpusError("csv corpus " + path.string() + " has no header");
    const auto& header = rows.front();
    auto column = [&](const std::string& name) -> std::ptrdiff_t {
      auto it = std::find(header.begin(), header.end(), name);
      return it == header.end() ? -1 : it - header.begin();
    };
    std::ptrdiff_t c_id = column("id"), c_text = column("text"),
                   c_gold = column("gold_label"), c_votes = column("annotator_labels"),
                   c_groups = column("groups"), c_dataset = column("dataset");
    if (c_text < 0 || c_gold < 0) {
      throw CorpusError("csv corpus " + path.string() +
                        " must have 'text' and 'gold_label' columns");
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const auto& row = rows[r];
      std::size_t line_no = r + 1;  // header is line 1
      auto cell = [&](std::ptrdiff_t c) -> std::string {
        return (c >= 0 && static_cast<std::size_t>(c) < row.size())
                   ? row[static_cast<std::size_t>(c)]
                   : std::string();
      };
      try {
        LabeledExample ex;
        ex.id = cell(c_id);
        if (ex.id.empty()) ex.id = "line" + std::to_string(line_no);
        ex.text = cell(c_text);
        std::string gold = cell(c_gold);
        if (gold != "0" && gold != "1") {
          throw MalformedRecord(line_no, "gold_label must be 0 or 1");
        }
        ex.gold_label = gold == "1" ? 1 : 0;
        for (char c : cell(c_votes)) {
          if (c == '0' || c == '1') {
            ex.annotator_labels.push_back(c - '0');
          } else if (c != ';' && c != ' ') {
            throw MalformedRecord(line_no, "annotator vote must be 0 or 1");
          }
        }
        ex.groups = split_groups_field(cell(c_groups));
        ex.dataset = cell(c_dataset);
        canonicalize_groups(ex);
        examples.push_back(std::move(ex));
      } catch (const MalformedRecord& e) {
        bad_lines.push_back(line_no);
        if (first_detail.empty()) first_detail = e.what();
      }
    }
  }

  if (bad_lines.size() == 1) {
    throw MalformedRecord(bad_lines.front(), first_detail);
  }
  if (bad_lines.size() > 1) {
    std::ostringstream msg;
    msg << bad_lines.size() << " malformed records in " << path.string()
        << " (lines";
    for (std::size_t line : bad_lines) msg << ' ' << line;
    msg << "); first: " << first_detail;
    throw MalformedRecords(std::move(bad_lines), msg.str());
  }

  Corpus corpus(std::move(examples), registry);
  corpus.source_digest_ = sha256_hex(content);
  corpus.source_path_ = path.string();
  return corpus;
}

void Corpus::save(const std::filesystem::path& path, CorpusFormat format) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write corpus file " + path.string());
  if (format == CorpusFormat::jsonl) {
    for (const LabeledExample& ex : examples_) {
      json j;
      j["id"] = ex.id;
      j["text"] = ex.text;
      j["gold_label"] = ex.gold_label;
      j["annotator_labels"] = ex.annotator_labels;
      j["groups"] = ex.groups;
      j["dataset"] = ex.dataset;
      out << j.dump() << '\n';
    }
  } else {
    out << "id,text,gold_label,annotator_labels,groups,dataset\n";
    for (const LabeledExample& ex : examples_) {
      std::string votes, groups;
      for (std::size_t i = 0; i < ex.annotator_labels.size(); ++i) {
        if (i) votes.push_back(';');
        votes.push_back(ex.annotator_labels[i] ? '1' : '0');
      }
      for (std::size_t i = 0; i < ex.groups.size(); ++i) {
        if (i) groups.push_back(';');
        groups += ex.groups[i];
      }
      out << csv::format_row({ex.id, ex.text, std::to_string(ex.gold_label),
                              votes, groups, ex.dataset})
          << '\n';
    }
  }
}

bool Corpus::has_id(std::string_view id) const {
  return index_.find(id) != index_.end();
}

const LabeledExample& Corpus::by_id(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw CorpusError("no example with id '" + std::string(id) + "'");
  }
  return examples_[it->second];
}

Corpus Corpus::keep_indices(const std::vector<std::size_t>& sorted_indices) const {
  std::vector<LabeledExample> kept;
  kept.reserve(sorted_indices.size());
  for (std::size_t i : sorted_indices) kept.push_back(examples_[i]);
  Corpus out(std::move(kept), registry_);
  out.source_digest_ = source_digest_;
  out.source_path_ = source_path_;
  return out;
}

Corpus Corpus::group_slice(const std::string& group) const {
  if (!registry_.contains(group)) throw UnknownGroup(group);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const auto& groups = examples_[i].groups;
    if (std::binary_search(groups.begin(), groups.end(), group)) keep.push_back(i);
  }
  return keep_indices(keep);
}

Corpus Corpus::label_slice(int gold_label) const {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    if (examples_[i].gold_label == gold_label) keep.push_back(i);
  }
  return keep_indices(keep);
}

Corpus Corpus::dataset_slice(std::string_view dataset) const {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    if (examples_[i].dataset == dataset) keep.push_back(i);
  }
  return keep_indices(keep);
}

Corpus Corpus::filter_unanimous(std::size_t min_annotators) const {
  if (min_annotators < 1) throw CorpusError("min_annotators must be >= 1");
  std::vector<LabeledExample> kept;
  for (const LabeledExample& ex : examples_) {
    if (ex.annotator_labels.size() < min_annotators) continue;
    bool unanimous = std::all_of(
        ex.annotator_labels.begin(), ex.annotator_labels.end(),
        [&](int v) { return v == ex.annotator_labels.front(); });
    if (!unanimous) continue;
    LabeledExample copy = ex;
    copy.gold_label = ex.annotator_labels.front();
    kept.push_back(std::move(copy));
  }
  Corpus out(std::move(kept), registry_);
  out.source_digest_ = source_digest_;
  out.source_path_ = source_path_;
  return out;
}

namespace {

// Uniformly keeps `keep` of the given positions; returns them sorted.
std::vector<std::size_t> downsample(const std::vector<std::size_t>& positions,
                                    std::size_t keep, Rng& rng) {
  auto picks = rng.sample_indices(positions.size(), keep);
  std::vector<std::size_t> out;
  out.reserve(keep);
  for (std::size_t p : picks) out.push_back(positions[p]);
  std::sort(out.begin(), out.end());
  return out;
}

// Balanced subset (by base-corpus position) of one stratum.
std::vector<std::size_t> balance_stratum(
    const std::vector<std::size_t>& positives,
    const std::vector<std::size_t>& negatives, const std::string& stratum_name,
    Rng& rng) {
  if (positives.empty() || negatives.empty()) throw EmptyStratum(stratum_name);
  std::size_t keep = std::min(positives.size(), negatives.size());
  std::vector<std::size_t> merged = downsample(positives, keep, rng);
  std::vector<std::size_t> neg = downsample(negatives, keep, rng);
  merged.insert(merged.end(), neg.begin(), neg.end());
  std::sort(merged.begin(), merged.end());
  return merged;
}

}  // namespace

Corpus Corpus::balance(BalanceMode mode, std::uint64_t seed) const {
  if (examples_.empty()) throw CorpusError("cannot balance an empty corpus");
  if (mode == BalanceMode::aggregate) {
    Rng rng(derive_seed(seed, "aggregate"));
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < examples_.size(); ++i) {
      (examples_[i].gold_label == 1 ? pos : neg).push_back(i);
    }
    return keep_indices(balance_stratum(pos, neg, "aggregate", rng));
  }
  // group mode: union of independently balanced group slices, untagged
  // examples carried through untouched. Each group draws from a seed derived
  // only from (seed, group id), so balanced_group_slice reproduces exactly
  // the members this union keeps for that group.
  std::set<std::size_t> keep;
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    if (examples_[i].groups.empty()) keep.insert(i);
  }
  for (const std::string& group : registry_.ids()) {
    std::vector<std::size_t> pos, neg;
    bool any = false;
    for (std::size_t i = 0; i < examples_.size(); ++i) {
      const auto& gs = examples_[i].groups;
      if (!std::binary_search(gs.begin(), gs.end(), group)) continue;
      any = true;
      (examples_[i].gold_label == 1 ? pos : neg).push_back(i);
    }
    if (!any) continue;  // group absent from this corpus, nothing to balance
    Rng group_rng(derive_seed(seed, group));
    for (std::size_t i : balance_stratum(pos, neg, group, group_rng)) {
      keep.insert(i);
    }
  }
  return keep_indices(std::vector<std::size_t>(keep.begin(), keep.end()));
}

Corpus Corpus::balanced_group_slice(const std::string& group,
                                    std::uint64_t seed) const {
  Corpus slice = group_slice(group);
  if (slice.empty()) return slice;
  Rng group_rng(derive_seed(seed, group));
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < slice.examples_.size(); ++i) {
    (slice.examples_[i].gold_label == 1 ? pos : neg).push_back(i);
  }
  return slice.keep_indices(balance_stratum(pos, neg, group, group_rng));
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   const GroupRegistry& registry) {
  return Corpus::load(path, format, registry);
}

}  // namespace modaudit
