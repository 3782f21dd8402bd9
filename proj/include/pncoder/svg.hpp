#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pncoder/annotation.hpp"
#include "pncoder/codebook.hpp"
#include "pncoder/metrics.hpp"

namespace pncoder {

enum class HeatmapScale {
  Diverging,  // [-1,1], blue-white-red; correlation-style matrices
  Sequential, // [0,1], white-to-blue; Jaccard-style matrices
};

/// Square labeled heatmap. Null cells render hatched. Output bytes are a pure
/// function of the inputs.
std::string heatmap_svg(const CooccurrenceMatrix &matrix, const std::vector<std::string> &labels,
                        const std::string &title, HeatmapScale scale);

void render_heatmap_svg(const CooccurrenceMatrix &matrix, const std::vector<std::string> &labels,
                        const std::string &title, HeatmapScale scale,
                        const std::filesystem::path &out_path);

/// One horizontal strip per selected code: contiguous sentence runs, width
/// proportional to run length, filled where the code is present.
std::string segment_strip_svg(const AnnotationMatrix &matrix,
                              const std::vector<std::string> &code_ids, const Codebook &cb,
                              const std::string &title);

/// Side-by-side comparison: for each code, one strip per matrix, stacked.
std::string segment_strip_pair_svg(const AnnotationMatrix &a, const AnnotationMatrix &b,
                                   const std::vector<std::string> &code_ids, const Codebook &cb,
                                   const std::string &title);

void render_segment_strip_svg(const AnnotationMatrix &matrix,
                              const std::vector<std::string> &code_ids, const Codebook &cb,
                              const std::string &title, const std::filesystem::path &out_path);

void render_segment_strip_pair_svg(const AnnotationMatrix &a, const AnnotationMatrix &b,
                                   const std::vector<std::string> &code_ids, const Codebook &cb,
                                   const std::string &title,
                                   const std::filesystem::path &out_path);

} // namespace pncoder
