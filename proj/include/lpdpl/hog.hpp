#ifndef LPDPL_HOG_HPP
#define LPDPL_HOG_HPP

#include <Eigen/Core>

#include "lpdpl/image.hpp"

namespace lpdpl {

using FeatureVector = Eigen::VectorXd;

enum class HogNormalization {
  global_minmax, // min-max over the whole flattened descriptor
  per_cell_minmax,
};

struct HogConfig {
  int cell_size = 3;
  int num_bins = 9;
  bool signed_orientations = false; // false: fold into [0, 180)
  bool soft_binning = true;         // linear interpolation between bin centers
  HogNormalization normalization = HogNormalization::global_minmax;

  int cells_per_side(int image_side = NormalizedGlyph::side) const {
    return image_side / cell_size; // partial edge cells are dropped
  }
  int feature_length(int image_side = NormalizedGlyph::side) const {
    const int c = cells_per_side(image_side);
    return c * c * num_bins;
  }
  void validate() const;
};

struct GradientField {
  Eigen::MatrixXd gx; // horizontal central differences
  Eigen::MatrixXd gy; // vertical central differences
};

struct CellHistograms {
  int cells_y = 0;
  int cells_x = 0;
  int num_bins = 0;
  Eigen::VectorXd values; // flattened (cy, cx, bin), bin fastest

  double& at(int cy, int cx, int bin) {
    return values[(static_cast<Eigen::Index>(cy) * cells_x + cx) * num_bins + bin];
  }
  double at(int cy, int cx, int bin) const {
    return values[(static_cast<Eigen::Index>(cy) * cells_x + cx) * num_bins + bin];
  }
};

// Central differences with replicate borders:
// gx(r,c) = I(r,c+1) - I(r,c-1), gy(r,c) = I(r+1,c) - I(r-1,c).
GradientField gradients(const Eigen::MatrixXd& image);
GradientField gradients(const NormalizedGlyph& glyph);

// Magnitude-weighted orientation voting per cell. Each pixel's gradient
// magnitude splits linearly between the two bin centers nearest its
// orientation (circular across the fold point); hard binning puts all mass
// in the nearest center.
CellHistograms cell_histograms(const GradientField& grads, const HogConfig& cfg);

// Rescales the flattened histogram tensor to [0,1] by the configured
// min-max rule; a constant tensor maps to the zero vector.
FeatureVector normalize_features(const CellHistograms& hists, const HogConfig& cfg);

FeatureVector extract(const NormalizedGlyph& glyph, const HogConfig& cfg);

// Same descriptor on a real-valued image in [0,1] (pre-sized grayscale path).
FeatureVector extract_real(const Eigen::MatrixXd& image, const HogConfig& cfg);

Eigen::MatrixXd glyph_to_matrix(const NormalizedGlyph& glyph);

} // namespace lpdpl

#endif
