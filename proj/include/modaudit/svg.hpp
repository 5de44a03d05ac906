#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modaudit/tokenize.hpp"

namespace modaudit {

// Stamped into every rendered figure as an XML comment so a figure can be
// traced back to the run that produced it.
struct SvgMeta {
  std::string tool_version;
  std::string manifest_digest;
  std::uint64_t seed = 0;
};

// One row of the counterfactual-shift plot: point estimate plus optional
// 95% interval, keyed by group and label slice.
struct CtfPlotRow {
  std::string group;
  std::string label_slice;
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
};

std::string render_ctf_plot(const std::vector<CtfPlotRow>& rows,
                            const std::string& provider, const SvgMeta& meta);

// Word-level cell of a heat strip after subword merging.
struct HeatCell {
  std::string word;
  double value = 0.0;
};

struct HeatStrip {
  std::string source_id;
  std::vector<HeatCell> cells;
};

// Collapse continuation subwords ("##xxx") into the word they belong to,
// summing their attribution values, so the strip shows whole words.
std::vector<HeatCell> merge_subwords(const std::vector<std::string>& tokens,
                                     const std::vector<double>& values);

// Red cells push toward a hate verdict, blue cells away from one; color
// intensity is scaled by the largest |value| across all strips.
std::string render_heat_strips(const std::vector<HeatStrip>& strips,
                               const std::string& provider,
                               const SvgMeta& meta);

std::string escape_xml(const std::string& text);

}  // namespace modaudit
