#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gazenet/core.hpp"

namespace gazenet {

// Per-frame H x W saliency raster, row-major, row 0 at the top of the screen.
struct SaliencyMap {
  int frame_index = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  SaliencyMap() = default;
  SaliencyMap(int frame, int h, int w, std::vector<double> v);

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
  void validate() const;
};

// (v - min) / (max - min); constant maps become all zeros.
SaliencyMap minmax_normalize(const SaliencyMap& s);

struct ExtractionMaskSpec {
  double sigma_deg = 1.5;
  // Gaussian support is truncated at this many standard deviations.
  double truncate_sigmas = 4.0;
};

// Normalized Gaussian weights over the rectangular support
// [row0, row0+rows) x [col0, col0+cols) of an H x W raster. Cells outside
// the support carry zero weight.
struct ExtractionMask {
  int height = 0;
  int width = 0;
  int row0 = 0;
  int col0 = 0;
  int rows = 0;
  int cols = 0;
  int center_row = 0;
  int center_col = 0;
  std::vector<double> weights;

  double at(int row, int col) const;
  std::vector<double> to_dense() const;
  double sum() const;
};

// Raster cell containing a fixation; coordinates outside the screen clamp to
// the border cells.
std::pair<int, int> fixation_cell(const Fixation& fix, int raster_h, int raster_w, const ScreenGeometry& g);

// Gaussian standard deviation in raster cells along rows / columns.
std::pair<double, double> sigma_in_cells(int raster_h, int raster_w, const ScreenGeometry& g,
                                         const ExtractionMaskSpec& spec);

ExtractionMask build_extraction_mask(const Fixation& fix, int raster_h, int raster_w, const ScreenGeometry& g,
                                     const ExtractionMaskSpec& spec);

// Mask built directly around a raster cell.
ExtractionMask build_extraction_mask_at(int center_row, int center_col, int raster_h, int raster_w,
                                        double sigma_rows, double sigma_cols, double truncate_sigmas);

// Sum over cells of mask * saliency.
double extract_saliency(const SaliencyMap& normalized, const ExtractionMask& mask);

// SALR1 binary raster file.
void write_saliency_file(const std::filesystem::path& path, const SaliencyMap& s);
SaliencyMap read_saliency_file(const std::filesystem::path& path);
std::filesystem::path saliency_frame_path(const std::filesystem::path& video_dir, int frame_index);

// Lazily loads and min-max normalizes the frames of one video.
class SaliencyStore {
 public:
  explicit SaliencyStore(std::filesystem::path video_dir) : dir_(std::move(video_dir)) {}

  // Throws Error(Io) naming the frame if the raster file is missing.
  const SaliencyMap& normalized_frame(int frame_index);

 private:
  std::filesystem::path dir_;
  std::map<int, std::unique_ptr<SaliencyMap>> cache_;
};

}  // namespace gazenet
