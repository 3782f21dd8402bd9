#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pncoder/annotation.hpp"
#include "pncoder/codebook.hpp"

namespace testutil {

inline std::filesystem::path source_dir() { return PNCODER_SOURCE_DIR; }

inline std::filesystem::path fixture(const std::string &rel) {
  return source_dir() / "tests" / "fixtures" / rel;
}

inline std::filesystem::path data_file(const std::string &rel) {
  return source_dir() / "data" / rel;
}

inline std::string slurp(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good()) {
    throw std::runtime_error("missing file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

using Grid = std::vector<std::vector<int>>;

inline pncoder::AnnotationMatrix matrix_from_grid(const Grid &grid, const pncoder::Codebook &cb,
                                                  const std::string &narrative_id,
                                                  const pncoder::AnnotatorId &annotator) {
  pncoder::AnnotationMatrix m(narrative_id, cb.version(), annotator, grid.size(), cb.size());
  for (std::size_t r = 0; r < grid.size(); ++r) {
    for (std::size_t c = 0; c < grid[r].size(); ++c) {
      m.set_cell(r, c, static_cast<std::uint8_t>(grid[r][c]));
    }
  }
  return m;
}

inline Grid grid_from_matrix(const pncoder::AnnotationMatrix &m) {
  Grid grid(m.rows(), std::vector<int>(m.cols(), 0));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      grid[r][c] = m.cell(r, c);
    }
  }
  return grid;
}

/// Random binary grid with per-column density varied so that degenerate
/// columns (all zeros, all ones) appear regularly.
inline Grid random_grid(std::mt19937 &rng, std::size_t rows, std::size_t cols) {
  Grid grid(rows, std::vector<int>(cols, 0));
  std::uniform_real_distribution<double> density_pick(0.0, 1.0);
  for (std::size_t c = 0; c < cols; ++c) {
    double pick = density_pick(rng);
    double density = pick < 0.1 ? 0.0 : pick < 0.2 ? 1.0 : density_pick(rng);
    std::bernoulli_distribution bit(density);
    for (std::size_t r = 0; r < rows; ++r) {
      grid[r][c] = bit(rng) ? 1 : 0;
    }
  }
  return grid;
}

/// A scratch directory under the build tree, wiped on construction.
class TempDir {
public:
  explicit TempDir(const std::string &name)
      : path_(std::filesystem::temp_directory_path() / ("pncoder_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path &path() const { return path_; }

private:
  std::filesystem::path path_;
};

} // namespace testutil
