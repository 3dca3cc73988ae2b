#include "gazenet/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gazenet/error.hpp"
#include "gazenet/kernels.hpp"
#include "gazenet/text_io.hpp"

namespace gazenet {

SaliencyMap::SaliencyMap(int frame, int h, int w, std::vector<double> v)
    : frame_index(frame), height(h), width(w), values(std::move(v)) {
  validate();
}

void SaliencyMap::validate() const {
  if (height <= 0 || width <= 0) fail(ErrorCategory::Shape, "saliency map dimensions must be positive");
  if (values.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    fail(ErrorCategory::Shape, "saliency map value count does not match H*W");
  }
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      fail(ErrorCategory::Data, "saliency values must be finite and non-negative (frame " +
                                    std::to_string(frame_index) + ")");
    }
  }
}

SaliencyMap minmax_normalize(const SaliencyMap& s) {
  SaliencyMap out = s;
  const auto [lo_it, hi_it] = std::minmax_element(s.values.begin(), s.values.end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;
  if (!(range > 0)) {
    std::fill(out.values.begin(), out.values.end(), 0.0);
    return out;
  }
  for (double& v : out.values) v = (v - lo) / range;
  return out;
}

double ExtractionMask::at(int row, int col) const {
  if (row < row0 || row >= row0 + rows || col < col0 || col >= col0 + cols) return 0.0;
  return weights[static_cast<std::size_t>(row - row0) * cols + (col - col0)];
}

std::vector<double> ExtractionMask::to_dense() const {
  std::vector<double> dense(static_cast<std::size_t>(height) * width, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      dense[static_cast<std::size_t>(row0 + r) * width + (col0 + c)] = weights[static_cast<std::size_t>(r) * cols + c];
    }
  }
  return dense;
}

double ExtractionMask::sum() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

std::pair<int, int> fixation_cell(const Fixation& fix, int raster_h, int raster_w, const ScreenGeometry& g) {
  if (!std::isfinite(fix.x_deg) || !std::isfinite(fix.y_deg)) {
    fail(ErrorCategory::InvalidArgument, "fixation location must be finite");
  }
  const double x_px = deg_to_px(std::clamp(fix.x_deg, -89.0, 89.0), Axis::Horizontal, g);
  const double y_px = deg_to_px(std::clamp(fix.y_deg, -89.0, 89.0), Axis::Vertical, g);
  const double col = std::floor(x_px * raster_w / g.width_px);
  const double row = std::floor(y_px * raster_h / g.height_px);
  return {static_cast<int>(std::clamp(row, 0.0, raster_h - 1.0)), static_cast<int>(std::clamp(col, 0.0, raster_w - 1.0))};
}

std::pair<double, double> sigma_in_cells(int raster_h, int raster_w, const ScreenGeometry& g,
                                         const ExtractionMaskSpec& spec) {
  if (!(spec.sigma_deg > 0)) fail(ErrorCategory::InvalidArgument, "mask sigma must be positive");
  const double sigma_cols = spec.sigma_deg * px_per_deg_at_center(Axis::Horizontal, g) * raster_w / g.width_px;
  const double sigma_rows = spec.sigma_deg * px_per_deg_at_center(Axis::Vertical, g) * raster_h / g.height_px;
  return {sigma_rows, sigma_cols};
}

ExtractionMask build_extraction_mask_at(int center_row, int center_col, int raster_h, int raster_w,
                                        double sigma_rows, double sigma_cols, double truncate_sigmas) {
  if (sigma_rows < 0.5 || sigma_cols < 0.5) {
    fail(ErrorCategory::InvalidArgument,
         "extraction mask sigma is below half a raster cell; use a higher-resolution saliency raster");
  }
  if (center_row < 0 || center_row >= raster_h || center_col < 0 || center_col >= raster_w) {
    fail(ErrorCategory::InvalidArgument, "mask centre outside the raster");
  }
  const int half_r = static_cast<int>(std::floor(truncate_sigmas * sigma_rows));
  const int half_c = static_cast<int>(std::floor(truncate_sigmas * sigma_cols));
  ExtractionMask m;
  m.height = raster_h;
  m.width = raster_w;
  m.center_row = center_row;
  m.center_col = center_col;
  m.row0 = std::max(0, center_row - half_r);
  m.col0 = std::max(0, center_col - half_c);
  m.rows = std::min(raster_h - 1, center_row + half_r) - m.row0 + 1;
  m.cols = std::min(raster_w - 1, center_col + half_c) - m.col0 + 1;
  m.weights.resize(static_cast<std::size_t>(m.rows) * m.cols);

  const double inv_r = 1.0 / (2.0 * sigma_rows * sigma_rows);
  const double inv_c = 1.0 / (2.0 * sigma_cols * sigma_cols);
  double total = 0.0;
  for (int r = 0; r < m.rows; ++r) {
    const double dr = m.row0 + r - center_row;
    for (int c = 0; c < m.cols; ++c) {
      const double dc = m.col0 + c - center_col;
      const double w = std::exp(-(dr * dr * inv_r + dc * dc * inv_c));
      m.weights[static_cast<std::size_t>(r) * m.cols + c] = w;
      total += w;
    }
  }
  for (double& w : m.weights) w /= total;
  return m;
}

ExtractionMask build_extraction_mask(const Fixation& fix, int raster_h, int raster_w, const ScreenGeometry& g,
                                     const ExtractionMaskSpec& spec) {
  const auto [row, col] = fixation_cell(fix, raster_h, raster_w, g);
  const auto [sr, sc] = sigma_in_cells(raster_h, raster_w, g, spec);
  return build_extraction_mask_at(row, col, raster_h, raster_w, sr, sc, spec.truncate_sigmas);
}

double extract_saliency(const SaliencyMap& s, const ExtractionMask& mask) {
  if (s.height != mask.height || s.width != mask.width) {
    fail(ErrorCategory::Shape, "saliency map and extraction mask dimensions differ");
  }
  const auto& k = kernels::active();
  double total = 0.0;
  for (int r = 0; r < mask.rows; ++r) {
    const double* srow = s.values.data() + static_cast<std::size_t>(mask.row0 + r) * s.width + mask.col0;
    total += k.dot(mask.weights.data() + static_cast<std::size_t>(r) * mask.cols, srow,
                   static_cast<std::size_t>(mask.cols));
  }
  return total;
}

void write_saliency_file(const std::filesystem::path& path, const SaliencyMap& s) {
  std::string out = "SALR1\n";
  out += std::to_string(s.frame_index) + ' ' + std::to_string(s.height) + ' ' + std::to_string(s.width) + '\n';
  out.reserve(out.size() + s.values.size() * 4);
  for (double v : s.values) text_io::append_f32_le(out, v);
  text_io::write_file(path, out);
}

SaliencyMap read_saliency_file(const std::filesystem::path& path) {
  const std::string bytes = text_io::read_file(path);
  constexpr std::string_view magic = "SALR1\n";
  if (bytes.compare(0, magic.size(), magic) != 0) fail(ErrorCategory::Format, path.string() + ": bad SALR1 magic");
  const auto eol = bytes.find('\n', magic.size());
  if (eol == std::string::npos) fail(ErrorCategory::Format, path.string() + ": missing raster header");
  const auto header = text_io::split(std::string_view(bytes).substr(magic.size(), eol - magic.size()), ' ');
  if (header.size() != 3) fail(ErrorCategory::Format, path.string() + ": raster header must be 'frame H W'");
  const int frame = static_cast<int>(text_io::parse_int(header[0], path.string()));
  const long long h = text_io::parse_int(header[1], path.string());
  const long long w = text_io::parse_int(header[2], path.string());
  if (h <= 0 || w <= 0) fail(ErrorCategory::Format, path.string() + ": non-positive raster size");
  const std::size_t count = static_cast<std::size_t>(h * w);
  const std::size_t payload = eol + 1;
  if (bytes.size() != payload + 4 * count) fail(ErrorCategory::Format, path.string() + ": payload size mismatch");
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = text_io::read_f32_le(bytes, payload + 4 * i);
  return SaliencyMap(frame, static_cast<int>(h), static_cast<int>(w), std::move(values));
}

std::filesystem::path saliency_frame_path(const std::filesystem::path& video_dir, int frame_index) {
  return video_dir / ("frame_" + std::to_string(frame_index) + ".salr");
}

const SaliencyMap& SaliencyStore::normalized_frame(int frame_index) {
  auto it = cache_.find(frame_index);
  if (it != cache_.end()) return *it->second;
  const auto path = saliency_frame_path(dir_, frame_index);
  if (!std::filesystem::exists(path)) {
    fail(ErrorCategory::Io, "missing saliency raster for frame " + std::to_string(frame_index) + " (" +
                                path.string() + ")");
  }
  auto map = std::make_unique<SaliencyMap>(minmax_normalize(read_saliency_file(path)));
  return *cache_.emplace(frame_index, std::move(map)).first->second;
}

}  // namespace gazenet
