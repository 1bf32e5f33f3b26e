#include "lpdpl/pipeline.hpp"

#include <string>

#include "lpdpl/errors.hpp"

namespace lpdpl {

namespace {

Eigen::MatrixXd gray_to_unit_matrix(const GrayImage& img) {
  Eigen::MatrixXd m(img.height, img.width);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) m(r, c) = img.at(r, c) / 255.0;
  return m;
}

} // namespace

FeatureVector FeaturePipeline::run(const GrayImage& img) const {
  const int side = NormalizedGlyph::side;

  if (preprocess == PreprocessMode::grayscale) {
    const GrayImage resized = resize_gray(img, side, side);
    const Eigen::MatrixXd unit = gray_to_unit_matrix(resized);
    if (features == FeatureKind::hog) return extract_real(unit, hog);
    return Eigen::Map<const Eigen::MatrixXd>(unit.data(), unit.size(), 1);
  }

  NormalizedGlyph glyph;
  if (preprocess == PreprocessMode::resize_binarize) {
    const GrayImage resized = resize_gray(img, side, side);
    const BinaryImage binary = binarize(resized, otsu_threshold(resized));
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c) glyph.at(r, c) = binary.at(r, c);
  } else {
    glyph = preprocess_pipeline(img);
  }

  if (features == FeatureKind::hog) return extract(glyph, hog);

  FeatureVector raw(side * side);
  for (int i = 0; i < side * side; ++i) raw[i] = static_cast<double>(glyph.data[i]);
  return raw;
}

const char* to_string(PreprocessMode m) {
  switch (m) {
    case PreprocessMode::full: return "full";
    case PreprocessMode::resize_binarize: return "resize_binarize";
    case PreprocessMode::grayscale: return "grayscale";
  }
  return "full";
}

const char* to_string(FeatureKind k) {
  return k == FeatureKind::hog ? "hog" : "raw_pixels";
}

PreprocessMode preprocess_mode_from_string(const std::string& s) {
  if (s == "full") return PreprocessMode::full;
  if (s == "resize_binarize") return PreprocessMode::resize_binarize;
  if (s == "grayscale") return PreprocessMode::grayscale;
  throw ManifestError("unknown preprocess mode: " + s);
}

FeatureKind feature_kind_from_string(const std::string& s) {
  if (s == "hog") return FeatureKind::hog;
  if (s == "raw_pixels" || s == "raw") return FeatureKind::raw_pixels;
  throw ManifestError("unknown feature kind: " + s);
}

} // namespace lpdpl
