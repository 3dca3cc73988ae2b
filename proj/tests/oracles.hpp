#pragma once

// Straightforward reference implementations used to check the optimized
// library code. They favour obviousness over speed and share no code with
// the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gazenet/core.hpp"
#include "gazenet/events.hpp"

namespace oracle {

// Dispersion (x range + y range) of samples [i, j], recomputed from scratch.
inline double dispersion(const std::vector<gazenet::DegreeSample>& s, std::size_t i, std::size_t j) {
  double min_x = s[i].x_deg, max_x = s[i].x_deg, min_y = s[i].y_deg, max_y = s[i].y_deg;
  for (std::size_t k = i; k <= j; ++k) {
    min_x = std::min(min_x, s[k].x_deg);
    max_x = std::max(max_x, s[k].x_deg);
    min_y = std::min(min_y, s[k].y_deg);
    max_y = std::max(max_y, s[k].y_deg);
  }
  return (max_x - min_x) + (max_y - min_y);
}

// Brute-force I-DT over one contiguous segment.
inline std::vector<gazenet::Fixation> idt(const std::vector<gazenet::DegreeSample>& s, double threshold,
                                          double min_duration) {
  std::vector<gazenet::Fixation> out;
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    bool found = false;
    for (; j < s.size(); ++j) {
      if (s[j].t_ms - s[i].t_ms >= min_duration) {
        found = true;
        break;
      }
    }
    if (!found) break;
    if (dispersion(s, i, j) > threshold) {
      ++i;
      continue;
    }
    while (j + 1 < s.size() && dispersion(s, i, j + 1) <= threshold) ++j;
    double sx = 0, sy = 0;
    for (std::size_t k = i; k <= j; ++k) {
      sx += s[k].x_deg;
      sy += s[k].y_deg;
    }
    gazenet::Fixation f;
    f.x_deg = sx / double(j - i + 1);
    f.y_deg = sy / double(j - i + 1);
    f.onset_ms = s[i].t_ms;
    f.duration_ms = s[j].t_ms - s[i].t_ms;
    out.push_back(f);
    i = j + 1;
  }
  return out;
}

// Splits degree samples at gaps longer than max_gap.
inline std::vector<std::vector<gazenet::DegreeSample>> split_at_gaps(const std::vector<gazenet::DegreeSample>& all,
                                                                     double max_gap) {
  std::vector<std::vector<gazenet::DegreeSample>> out;
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (k == 0 || all[k].t_ms - all[k - 1].t_ms > max_gap) out.emplace_back();
    out.back().push_back(all[k]);
  }
  return out;
}

// Visual angle from pixel position by plain trigonometry.
inline double visual_angle(double px, double screen_px, double screen_cm, double distance_cm) {
  const double offset_cm = (px - screen_px / 2.0) * screen_cm / screen_px;
  return std::atan2(offset_cm, distance_cm) * 180.0 / 3.14159265358979323846;
}

// AUC by counting every positive/negative pair; ties count one half.
inline double auc_pairs(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1;
      if (s[i] > s[j]) wins += 1;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Full-matrix edit distance.
inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  }
  return d[a.size()][b.size()];
}

// Dense truncated Gaussian weights over an H x W raster, normalized to 1.
inline std::vector<double> gaussian_mask(int h, int w, int cr, int cc, double sr, double sc, double trunc) {
  std::vector<double> m(std::size_t(h) * w, 0.0);
  const int hr = int(std::floor(trunc * sr));
  const int hc = int(std::floor(trunc * sc));
  double total = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (std::abs(r - cr) > hr || std::abs(c - cc) > hc) continue;
      const double v = std::exp(-0.5 * ((r - cr) * (r - cr) / (sr * sr) + (c - cc) * (c - cc) / (sc * sc)));
      m[std::size_t(r) * w + c] = v;
      total += v;
    }
  }
  for (double& v : m) v /= total;
  return m;
}

// Sample mean and standard error.
inline std::pair<double, double> mean_se(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= double(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / double(v.size() - 1)) / std::sqrt(double(v.size()))};
}

// Relative error between two gradient vectors.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) + std::sqrt(nb);
  return denom == 0 ? 0 : std::sqrt(diff) / denom;
}

// Architecture rules checked independently of the library.
inline bool conv_rules_hold(const std::vector<int>& kernels, const std::vector<int>& filters,
                            const std::vector<int>& strides) {
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    if (i > 0 && kernels[i] > kernels[i - 1]) return false;
    if (i > 0 && filters[i] < filters[i - 1]) return false;
    if (kernels[i] <= 5 && strides[i] != 1) return false;
    if (kernels[i] == 7 && strides[i] > 2) return false;
  }
  return true;
}

}  // namespace oracle
