#include "lpdpl/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cstdint>

namespace lpdpl {

namespace {

std::array<std::int64_t, 256> intensity_histogram(const GrayImage& img) {
  std::array<std::int64_t, 256> hist{};
  for (auto v : img.data) ++hist[v];
  return hist;
}

} // namespace

int otsu_threshold(const GrayImage& img) {
  const auto hist = intensity_histogram(img);
  const auto [mn, mx] = std::minmax_element(img.data.begin(), img.data.end());
  if (*mn == *mx) return *mn;

  const double total = static_cast<double>(img.data.size());
  double total_sum = 0.0;
  for (int v = 0; v < 256; ++v) total_sum += static_cast<double>(v) * hist[v];

  int best_t = 0;
  double best_var = -1.0;
  double w0 = 0.0;   // pixel count with value <= t
  double sum0 = 0.0; // intensity sum over that side
  for (int t = 0; t < 256; ++t) {
    w0 += static_cast<double>(hist[t]);
    sum0 += static_cast<double>(t) * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double mu0 = sum0 / w0;
    const double mu1 = (total_sum - sum0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best_var) {
      best_var = between;
      best_t = t;
    }
  }
  return best_t;
}

BinaryImage binarize(const GrayImage& img, int threshold) {
  BinaryImage out(img.width, img.height);
  std::int64_t low_count = 0;
  for (auto v : img.data) low_count += (v <= threshold) ? 1 : 0;
  const std::int64_t high_count = static_cast<std::int64_t>(img.data.size()) - low_count;

  if (high_count == 0) return out; // constant/degenerate split: all background

  // Ink is the minority side; the darker side wins a tie.
  const bool ink_is_low = low_count <= high_count;
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const bool low = img.data[i] <= threshold;
    out.data[i] = (low == ink_is_low) ? 1 : 0;
  }
  return out;
}

BinaryImage crop_to_bounding_box(const BinaryImage& img) {
  int rmin = img.height, rmax = -1, cmin = img.width, cmax = -1;
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      if (img.at(r, c)) {
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
      }
    }
  }
  if (rmax < 0) throw EmptyGlyph("crop_to_bounding_box: image has no foreground pixel");

  const int box_h = rmax - rmin + 1;
  const int box_w = cmax - cmin + 1;
  const int side = std::max(box_h, box_w);
  const int pad_top = (side - box_h) / 2;
  const int pad_left = (side - box_w) / 2;

  BinaryImage out(side, side);
  for (int r = 0; r < box_h; ++r)
    for (int c = 0; c < box_w; ++c)
      out.at(r + pad_top, c + pad_left) = img.at(rmin + r, cmin + c);
  return out;
}

namespace {

inline int nearest_source_index(int dst, int src_size, int dst_size) {
  const int idx = static_cast<int>((dst + 0.5) * src_size / dst_size);
  return std::clamp(idx, 0, src_size - 1);
}

} // namespace

NormalizedGlyph resize_to_32(const BinaryImage& img) {
  NormalizedGlyph out;
  const int n = NormalizedGlyph::side;
  for (int r = 0; r < n; ++r) {
    const int sr = nearest_source_index(r, img.height, n);
    for (int c = 0; c < n; ++c) {
      const int sc = nearest_source_index(c, img.width, n);
      out.at(r, c) = img.at(sr, sc);
    }
  }
  return out;
}

GrayImage resize_gray(const GrayImage& img, int out_width, int out_height) {
  GrayImage out(out_width, out_height);
  for (int r = 0; r < out_height; ++r) {
    const int sr = nearest_source_index(r, img.height, out_height);
    for (int c = 0; c < out_width; ++c) {
      const int sc = nearest_source_index(c, img.width, out_width);
      out.at(r, c) = img.at(sr, sc);
    }
  }
  return out;
}

NormalizedGlyph preprocess_pipeline(const GrayImage& img) {
  const int t = otsu_threshold(img);
  const BinaryImage binary = binarize(img, t);
  const BinaryImage cropped = crop_to_bounding_box(binary);
  return resize_to_32(cropped);
}

} // namespace lpdpl
