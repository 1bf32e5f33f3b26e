#ifndef LPDPL_PIPELINE_HPP
#define LPDPL_PIPELINE_HPP

#include "lpdpl/hog.hpp"
#include "lpdpl/image.hpp"
#include "lpdpl/preprocess.hpp"

namespace lpdpl {

enum class PreprocessMode {
  full,            // otsu -> binarize -> crop -> resize
  resize_binarize, // pre-centered input: resize to 32x32, then otsu binarize
  grayscale,       // resize to 32x32, keep intensities in [0,1]
};

enum class FeatureKind {
  hog,
  raw_pixels, // flattened 32x32 image (1024 values)
};

// Everything between a decoded raster and a feature column. Stored with the
// trained model so classification reproduces the training-time features.
struct FeaturePipeline {
  PreprocessMode preprocess = PreprocessMode::full;
  FeatureKind features = FeatureKind::hog;
  HogConfig hog;

  int feature_length() const {
    return features == FeatureKind::hog
               ? hog.feature_length()
               : NormalizedGlyph::side * NormalizedGlyph::side;
  }

  // Throws EmptyGlyph on the full path when no foreground survives.
  FeatureVector run(const GrayImage& img) const;
};

const char* to_string(PreprocessMode m);
const char* to_string(FeatureKind k);
PreprocessMode preprocess_mode_from_string(const std::string& s);
FeatureKind feature_kind_from_string(const std::string& s);

} // namespace lpdpl

#endif
