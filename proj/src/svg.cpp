#include "modaudit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace modaudit {

namespace {

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string meta_comment(const SvgMeta& meta) {
  return "<!-- generator=modaudit " + meta.tool_version + " manifest=" +
         meta.manifest_digest + " seed=" + std::to_string(meta.seed) +
         " -->\n";
}

std::string svg_open(double width, double height) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         fmt(width, 0) + "\" height=\"" + fmt(height, 0) +
         "\" viewBox=\"0 0 " + fmt(width, 0) + " " + fmt(height, 0) +
         "\" font-family=\"sans-serif\">\n";
}

std::string text_at(double x, double y, const std::string& body,
                    const std::string& extra = "") {
  return "<text x=\"" + fmt(x, 2) + "\" y=\"" + fmt(y, 2) + "\"" +
         (extra.empty() ? "" : " " + extra) + ">" + escape_xml(body) +
         "</text>\n";
}

std::string line_at(double x1, double y1, double x2, double y2,
                    const std::string& stroke, double width) {
  return "<line x1=\"" + fmt(x1, 2) + "\" y1=\"" + fmt(y1, 2) + "\" x2=\"" +
         fmt(x2, 2) + "\" y2=\"" + fmt(y2, 2) + "\" stroke=\"" + stroke +
         "\" stroke-width=\"" + fmt(width, 1) + "\"/>\n";
}

}  // namespace

std::string escape_xml(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_ctf_plot(const std::vector<CtfPlotRow>& rows,
                            const std::string& provider, const SvgMeta& meta) {
  const double left = 190.0, right = 30.0, top = 48.0, row_h = 28.0,
               bottom = 36.0, plot_w = 430.0;
  const double width = left + plot_w + right;
  const double height =
      top + row_h * static_cast<double>(std::max<std::size_t>(rows.size(), 1)) +
      bottom;

  // Value range: every point and interval end, always including zero.
  double lo = 0.0, hi = 0.0;
  for (const CtfPlotRow& row : rows) {
    lo = std::min(lo, row.ci_low.value_or(row.mean));
    hi = std::max(hi, row.ci_high.value_or(row.mean));
  }
  if (hi == lo) {
    lo -= 0.05;
    hi += 0.05;
  }
  const double pad = (hi - lo) * 0.08;
  lo -= pad;
  hi += pad;
  const auto x_of = [&](double v) {
    return left + (v - lo) / (hi - lo) * plot_w;
  };

  std::string out = meta_comment(meta) + svg_open(width, height);
  out += text_at(left, 22.0, "Score shift under identity swap — " + provider,
                 "font-size=\"14\" font-weight=\"bold\"");
  out += text_at(left, 38.0,
                 "negative = harsher on the marginalized phrasing",
                 "font-size=\"11\" fill=\"#555\"");

  // Zero reference and axis.
  const double axis_y = top + row_h * static_cast<double>(rows.size()) + 8.0;
  out += line_at(x_of(0.0), top - 6.0, x_of(0.0), axis_y - 4.0, "#999", 1.0);
  out += line_at(left, axis_y, left + plot_w, axis_y, "#333", 1.0);
  for (double tick : {lo + pad, 0.0, hi - pad}) {
    out += line_at(x_of(tick), axis_y, x_of(tick), axis_y + 4.0, "#333", 1.0);
    out += text_at(x_of(tick) - 14.0, axis_y + 16.0, fmt(tick, 2),
                   "font-size=\"10\" fill=\"#333\"");
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const CtfPlotRow& row = rows[i];
    const double cy = top + row_h * (static_cast<double>(i) + 0.5);
    out += text_at(8.0, cy + 4.0,
                   row.group + " / " + row.label_slice + " (n=" +
                       std::to_string(row.n) + ")",
                   "font-size=\"11\"");
    if (row.ci_low && row.ci_high) {
      out += line_at(x_of(*row.ci_low), cy, x_of(*row.ci_high), cy, "#1f77b4",
                     2.0);
      out += line_at(x_of(*row.ci_low), cy - 4.0, x_of(*row.ci_low), cy + 4.0,
                     "#1f77b4", 2.0);
      out += line_at(x_of(*row.ci_high), cy - 4.0, x_of(*row.ci_high),
                     cy + 4.0, "#1f77b4", 2.0);
    }
    out += "<circle cx=\"" + fmt(x_of(row.mean), 2) + "\" cy=\"" +
           fmt(cy, 2) + "\" r=\"4\" fill=\"#d62728\"/>\n";
    out += text_at(x_of(row.mean) + 8.0, cy - 6.0, fmt(row.mean, 3),
                   "font-size=\"10\" fill=\"#d62728\"");
  }
  out += "</svg>\n";
  return out;
}

std::vector<HeatCell> merge_subwords(const std::vector<std::string>& tokens,
                                     const std::vector<double>& values) {
  std::vector<HeatCell> cells;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& token = tokens[i];
    const double value = i < values.size() ? values[i] : 0.0;
    if (token.size() > 2 && token.compare(0, 2, "##") == 0 &&
        !cells.empty()) {
      cells.back().word += token.substr(2);
      cells.back().value += value;
    } else {
      cells.push_back({token, value});
    }
  }
  return cells;
}

std::string render_heat_strips(const std::vector<HeatStrip>& strips,
                               const std::string& provider,
                               const SvgMeta& meta) {
  // Shared intensity scale across all strips keeps rows comparable.
  double vmax = 0.0;
  for (const HeatStrip& strip : strips) {
    for (const HeatCell& cell : strip.cells) {
      vmax = std::max(vmax, std::abs(cell.value));
    }
  }

  const double cell_h = 22.0, cell_pad = 4.0, row_gap = 44.0, left = 8.0,
               top = 44.0, char_w = 7.2;
  double width = 320.0;
  for (const HeatStrip& strip : strips) {
    double x = left;
    for (const HeatCell& cell : strip.cells) {
      x += char_w * static_cast<double>(cell.word.size()) + 14.0 + cell_pad;
    }
    width = std::max(width, x + 16.0);
  }
  const double height =
      top + row_gap * static_cast<double>(std::max<std::size_t>(strips.size(), 1)) +
      12.0;

  std::string out = meta_comment(meta) + svg_open(width, height);
  out += text_at(left, 20.0, "Token attributions — " + provider,
                 "font-size=\"14\" font-weight=\"bold\"");
  out += text_at(left, 36.0,
                 "red pushes toward a hate verdict, blue pushes away",
                 "font-size=\"11\" fill=\"#555\"");

  for (std::size_t s = 0; s < strips.size(); ++s) {
    const HeatStrip& strip = strips[s];
    const double y = top + row_gap * static_cast<double>(s) + 14.0;
    out += text_at(left, y - 4.0, strip.source_id,
                   "font-size=\"9\" fill=\"#777\"");
    double x = left;
    for (const HeatCell& cell : strip.cells) {
      const double w =
          char_w * static_cast<double>(cell.word.size()) + 14.0;
      int shade = 0;
      if (vmax > 0.0) {
        shade = static_cast<int>(
            std::lround(std::abs(cell.value) / vmax * 170.0));
      }
      std::string fill;
      if (cell.value > 0.0) {
        fill = "rgb(255," + std::to_string(255 - shade) + "," +
               std::to_string(255 - shade) + ")";
      } else if (cell.value < 0.0) {
        fill = "rgb(" + std::to_string(255 - shade) + "," +
               std::to_string(255 - shade) + ",255)";
      } else {
        fill = "rgb(255,255,255)";
      }
      out += "<rect x=\"" + fmt(x, 2) + "\" y=\"" + fmt(y, 2) + "\" width=\"" +
             fmt(w, 2) + "\" height=\"" + fmt(cell_h, 2) + "\" fill=\"" +
             fill + "\" stroke=\"#ccc\" stroke-width=\"0.5\"/>\n";
      out += text_at(x + 7.0, y + 15.0, cell.word, "font-size=\"11\"");
      x += w + cell_pad;
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace modaudit
