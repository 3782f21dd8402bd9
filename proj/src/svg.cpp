#include "pncoder/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "pncoder/errors.hpp"
#include "pncoder/text.hpp"

namespace pncoder {

namespace {

using text::format_fixed;

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
    case '&':
      out += "&amp;";
      break;
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '"':
      out += "&quot;";
      break;
    default:
      out.push_back(c);
    }
  }
  return out;
}

struct Rgb {
  int r;
  int g;
  int b;
};

std::string hex(const Rgb &c) {
  static const char digits[] = "0123456789abcdef";
  std::string out = "#";
  for (int v : {c.r, c.g, c.b}) {
    out.push_back(digits[(v >> 4) & 0xf]);
    out.push_back(digits[v & 0xf]);
  }
  return out;
}

Rgb lerp(const Rgb &a, const Rgb &b, double t) {
  auto mix = [t](int x, int y) {
    return static_cast<int>(std::llround(static_cast<double>(x) + t * (y - x)));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

// Pinned color stops. Diverging: blue -> near-white -> red over [-1,1].
// Sequential: very light blue -> dark blue over [0,1].
const Rgb kDivLow{0x21, 0x66, 0xac};
const Rgb kDivMid{0xf7, 0xf7, 0xf7};
const Rgb kDivHigh{0xb2, 0x18, 0x2b};
const Rgb kSeqLow{0xf7, 0xfb, 0xff};
const Rgb kSeqHigh{0x08, 0x30, 0x6b};

Rgb scale_color(HeatmapScale scale, double value) {
  if (scale == HeatmapScale::Diverging) {
    double v = std::clamp(value, -1.0, 1.0);
    return v < 0 ? lerp(kDivMid, kDivLow, -v) : lerp(kDivMid, kDivHigh, v);
  }
  double v = std::clamp(value, 0.0, 1.0);
  return lerp(kSeqLow, kSeqHigh, v);
}

std::string text_color_for(const Rgb &background) {
  double luminance = 0.299 * background.r + 0.587 * background.g + 0.114 * background.b;
  return luminance < 140.0 ? "#ffffff" : "#222222";
}

void write_file(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

const char *kHatchDef =
    "  <defs>\n"
    "    <pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" "
    "patternTransform=\"rotate(45)\">\n"
    "      <rect width=\"6\" height=\"6\" fill=\"#ffffff\"/>\n"
    "      <line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#999999\" stroke-width=\"2\"/>\n"
    "    </pattern>\n"
    "  </defs>\n";

std::string svg_open(int width, int height) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
         " " + std::to_string(height) +
         "\" font-family=\"DejaVu Sans, Helvetica, sans-serif\">\n";
}

std::string text_el(const std::string &x, const std::string &y, int size,
                    const std::string &anchor, const std::string &extra,
                    const std::string &content) {
  std::string out = "  <text x=\"" + x + "\" y=\"" + y + "\" font-size=\"" +
                    std::to_string(size) + "\"";
  if (!anchor.empty()) {
    out += " text-anchor=\"" + anchor + "\"";
  }
  if (!extra.empty()) {
    out += " " + extra;
  }
  out += ">" + xml_escape(content) + "</text>\n";
  return out;
}

} // namespace

std::string heatmap_svg(const CooccurrenceMatrix &matrix, const std::vector<std::string> &labels,
                        const std::string &title, HeatmapScale scale) {
  const std::size_t n = matrix.size();
  if (n == 0) {
    throw ValidationError("heatmap needs a non-empty matrix");
  }
  if (labels.size() != n) {
    throw ValidationError("heatmap has " + std::to_string(n) + " rows but " +
                          std::to_string(labels.size()) + " labels");
  }
  for (const auto &row : matrix) {
    if (row.size() != n) {
      throw ValidationError("heatmap matrix is not square");
    }
  }

  const int cell = 44;
  const int left = 130;
  const int top = 150;
  const int grid = cell * static_cast<int>(n);
  const int legend_h = 64;
  const int width = left + grid + 30;
  const int height = top + grid + legend_h;

  std::string svg = svg_open(width, height);
  svg += kHatchDef;
  svg += "  <rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" fill=\"#ffffff\"/>\n";
  svg += text_el(std::to_string(left + grid / 2), "24", 15, "middle", "font-weight=\"bold\"",
                 title);

  for (std::size_t j = 0; j < n; ++j) {
    int cx = left + static_cast<int>(j) * cell + cell / 2;
    int by = top - 8;
    svg += text_el("0", "0", 11, "start",
                   "transform=\"translate(" + std::to_string(cx) + " " + std::to_string(by) +
                       ") rotate(-60)\"",
                   labels[j]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    int cy = top + static_cast<int>(i) * cell + cell / 2 + 4;
    svg += text_el(std::to_string(left - 8), std::to_string(cy), 11, "end", "", labels[i]);
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      int x = left + static_cast<int>(j) * cell;
      int y = top + static_cast<int>(i) * cell;
      const CooccurrenceCell &c = matrix[i][j];
      if (c.value) {
        Rgb color = scale_color(scale, *c.value);
        svg += "  <rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
               "\" width=\"" + std::to_string(cell) + "\" height=\"" + std::to_string(cell) +
               "\" fill=\"" + hex(color) + "\" stroke=\"#ffffff\" stroke-width=\"1\"/>\n";
        svg += text_el(std::to_string(x + cell / 2), std::to_string(y + cell / 2 + 4), 10,
                       "middle", "fill=\"" + text_color_for(color) + "\"",
                       format_fixed(*c.value, 2));
      } else {
        svg += "  <rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) +
               "\" width=\"" + std::to_string(cell) + "\" height=\"" + std::to_string(cell) +
               "\" fill=\"url(#hatch)\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
      }
    }
  }

  // Legend: a discrete ramp with end (and zero, when diverging) tick labels.
  const int ramp_w = 280;
  const int ramp_h = 12;
  const int steps = 56;
  const int rx = left;
  const int ry = top + grid + 24;
  double lo = scale == HeatmapScale::Diverging ? -1.0 : 0.0;
  for (int s = 0; s < steps; ++s) {
    double v = lo + (1.0 - lo) * (static_cast<double>(s) + 0.5) / steps;
    int x = rx + s * ramp_w / steps;
    int w = rx + (s + 1) * ramp_w / steps - x;
    svg += "  <rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(ry) + "\" width=\"" +
           std::to_string(w) + "\" height=\"" + std::to_string(ramp_h) + "\" fill=\"" +
           hex(scale_color(scale, v)) + "\"/>\n";
  }
  svg += text_el(std::to_string(rx), std::to_string(ry + ramp_h + 14), 10, "middle", "",
                 format_fixed(lo, 0));
  if (scale == HeatmapScale::Diverging) {
    svg += text_el(std::to_string(rx + ramp_w / 2), std::to_string(ry + ramp_h + 14), 10,
                   "middle", "", "0");
  }
  svg += text_el(std::to_string(rx + ramp_w), std::to_string(ry + ramp_h + 14), 10, "middle", "",
                 "1");
  svg += text_el(std::to_string(rx + ramp_w + 16), std::to_string(ry + ramp_h), 10, "start", "",
                 "hatched = undefined");

  svg += "</svg>\n";
  return svg;
}

namespace {

struct StripLayout {
  static constexpr int kLeft = 150;
  static constexpr double kWidth = 720.0;
  static constexpr int kTitleY = 24;
};

std::vector<std::size_t> column_indices(const std::vector<std::string> &code_ids,
                                        const Codebook &cb, std::size_t matrix_cols) {
  if (cb.size() != matrix_cols) {
    throw AlignmentError("matrix has " + std::to_string(matrix_cols) +
                         " columns but codebook has " + std::to_string(cb.size()));
  }
  std::vector<std::size_t> cols;
  cols.reserve(code_ids.size());
  for (const std::string &id : code_ids) {
    std::optional<std::size_t> idx = cb.index_of(id);
    if (!idx) {
      throw ValidationError("unknown code \"" + id + "\"");
    }
    cols.push_back(*idx);
  }
  if (cols.empty()) {
    throw ValidationError("segment strip needs at least one code");
  }
  return cols;
}

std::string strip_x(std::size_t sentence, std::size_t n) {
  return format_fixed(StripLayout::kLeft +
                          StripLayout::kWidth * static_cast<double>(sentence) /
                              static_cast<double>(n),
                      2);
}

std::string strip_w(std::size_t from, std::size_t to, std::size_t n) {
  return format_fixed(StripLayout::kWidth * static_cast<double>(to - from) /
                          static_cast<double>(n),
                      2);
}

/// Background plus one filled rect per contiguous run of 1s.
std::string one_strip(const AnnotationMatrix &m, std::size_t col, int y, int h,
                      const std::string &fill) {
  const std::size_t n = m.rows();
  std::string svg = "  <rect x=\"" + std::to_string(StripLayout::kLeft) + "\" y=\"" +
                    std::to_string(y) + "\" width=\"" + format_fixed(StripLayout::kWidth, 2) +
                    "\" height=\"" + std::to_string(h) +
                    "\" fill=\"#eeeeee\" stroke=\"#bbbbbb\" stroke-width=\"0.5\"/>\n";
  std::size_t row = 0;
  while (row < n) {
    if (m.cell(row, col) == 0) {
      ++row;
      continue;
    }
    std::size_t end = row;
    while (end < n && m.cell(end, col) != 0) {
      ++end;
    }
    svg += "  <rect x=\"" + strip_x(row, n) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
           strip_w(row, end, n) + "\" height=\"" + std::to_string(h) + "\" fill=\"" + fill +
           "\"/>\n";
    row = end;
  }
  return svg;
}

std::string sentence_axis(std::size_t n, int y) {
  std::string svg = "  <line x1=\"" + std::to_string(StripLayout::kLeft) + "\" y1=\"" +
                    std::to_string(y) + "\" x2=\"" +
                    format_fixed(StripLayout::kLeft + StripLayout::kWidth, 2) + "\" y2=\"" +
                    std::to_string(y) + "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  std::size_t step = n <= 25 ? 5 : 10;
  for (std::size_t t = 0; t <= n; t += step) {
    svg += "  <line x1=\"" + strip_x(t, n) + "\" y1=\"" + std::to_string(y) + "\" x2=\"" +
           strip_x(t, n) + "\" y2=\"" + std::to_string(y + 5) +
           "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    svg += text_el(strip_x(t, n), std::to_string(y + 18), 10, "middle", "", std::to_string(t));
  }
  if (n % step != 0) {
    svg += "  <line x1=\"" + strip_x(n, n) + "\" y1=\"" + std::to_string(y) + "\" x2=\"" +
           strip_x(n, n) + "\" y2=\"" + std::to_string(y + 5) +
           "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    svg += text_el(strip_x(n, n), std::to_string(y + 18), 10, "middle", "", std::to_string(n));
  }
  svg += text_el(format_fixed(StripLayout::kLeft + StripLayout::kWidth / 2, 2),
                 std::to_string(y + 34), 11, "middle", "", "sentence");
  return svg;
}

const char *kStripFillA = "#4c78a8";
const char *kStripFillB = "#f58518";

} // namespace

std::string segment_strip_svg(const AnnotationMatrix &matrix,
                              const std::vector<std::string> &code_ids, const Codebook &cb,
                              const std::string &title) {
  std::vector<std::size_t> cols = column_indices(code_ids, cb, matrix.cols());
  const int row_pitch = 28;
  const int strip_h = 16;
  const int top = 44;
  const int axis_y = top + row_pitch * static_cast<int>(cols.size()) + 6;
  const int width = StripLayout::kLeft + static_cast<int>(StripLayout::kWidth) + 30;
  const int height = axis_y + 48;

  std::string svg = svg_open(width, height);
  svg += "  <rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" fill=\"#ffffff\"/>\n";
  svg += text_el(std::to_string(width / 2), std::to_string(StripLayout::kTitleY), 15, "middle",
                 "font-weight=\"bold\"", title);

  for (std::size_t k = 0; k < cols.size(); ++k) {
    int y = top + static_cast<int>(k) * row_pitch;
    svg += text_el(std::to_string(StripLayout::kLeft - 8), std::to_string(y + strip_h / 2 + 4),
                   11, "end", "", cb.codes()[cols[k]].display_name);
    svg += one_strip(matrix, cols[k], y, strip_h, kStripFillA);
  }
  svg += sentence_axis(matrix.rows(), axis_y);
  svg += "</svg>\n";
  return svg;
}

std::string segment_strip_pair_svg(const AnnotationMatrix &a, const AnnotationMatrix &b,
                                   const std::vector<std::string> &code_ids, const Codebook &cb,
                                   const std::string &title) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw AlignmentError("paired strips need matrices of the same shape");
  }
  std::vector<std::size_t> cols = column_indices(code_ids, cb, a.cols());
  const int strip_h = 11;
  const int row_pitch = 2 * strip_h + 2 + 10;
  const int top = 66;
  const int axis_y = top + row_pitch * static_cast<int>(cols.size()) + 6;
  const int width = StripLayout::kLeft + static_cast<int>(StripLayout::kWidth) + 30;
  const int height = axis_y + 48;

  std::string svg = svg_open(width, height);
  svg += "  <rect x=\"0\" y=\"0\" width=\"" + std::to_string(width) + "\" height=\"" +
         std::to_string(height) + "\" fill=\"#ffffff\"/>\n";
  svg += text_el(std::to_string(width / 2), std::to_string(StripLayout::kTitleY), 15, "middle",
                 "font-weight=\"bold\"", title);

  int ly = StripLayout::kTitleY + 18;
  svg += "  <rect x=\"" + std::to_string(StripLayout::kLeft) + "\" y=\"" +
         std::to_string(ly - 9) + "\" width=\"12\" height=\"12\" fill=\"" + kStripFillA +
         "\"/>\n";
  svg += text_el(std::to_string(StripLayout::kLeft + 18), std::to_string(ly + 1), 11, "start", "",
                 a.annotator().label);
  svg += "  <rect x=\"" + std::to_string(StripLayout::kLeft + 220) + "\" y=\"" +
         std::to_string(ly - 9) + "\" width=\"12\" height=\"12\" fill=\"" + kStripFillB +
         "\"/>\n";
  svg += text_el(std::to_string(StripLayout::kLeft + 238), std::to_string(ly + 1), 11, "start",
                 "", b.annotator().label);

  for (std::size_t k = 0; k < cols.size(); ++k) {
    int y = top + static_cast<int>(k) * row_pitch;
    svg += text_el(std::to_string(StripLayout::kLeft - 8), std::to_string(y + strip_h + 5), 11,
                   "end", "", cb.codes()[cols[k]].display_name);
    svg += one_strip(a, cols[k], y, strip_h, kStripFillA);
    svg += one_strip(b, cols[k], y + strip_h + 2, strip_h, kStripFillB);
  }
  svg += sentence_axis(a.rows(), axis_y);
  svg += "</svg>\n";
  return svg;
}

void render_heatmap_svg(const CooccurrenceMatrix &matrix, const std::vector<std::string> &labels,
                        const std::string &title, HeatmapScale scale,
                        const std::filesystem::path &out_path) {
  write_file(out_path, heatmap_svg(matrix, labels, title, scale));
}

void render_segment_strip_svg(const AnnotationMatrix &matrix,
                              const std::vector<std::string> &code_ids, const Codebook &cb,
                              const std::string &title, const std::filesystem::path &out_path) {
  write_file(out_path, segment_strip_svg(matrix, code_ids, cb, title));
}

void render_segment_strip_pair_svg(const AnnotationMatrix &a, const AnnotationMatrix &b,
                                   const std::vector<std::string> &code_ids, const Codebook &cb,
                                   const std::string &title,
                                   const std::filesystem::path &out_path) {
  write_file(out_path, segment_strip_pair_svg(a, b, code_ids, cb, title));
}

} // namespace pncoder
