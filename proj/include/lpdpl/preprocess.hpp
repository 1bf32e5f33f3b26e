#ifndef LPDPL_PREPROCESS_HPP
#define LPDPL_PREPROCESS_HPP

#include "lpdpl/image.hpp"

namespace lpdpl {

// Global threshold maximizing the between-class variance of the 256-bin
// intensity histogram. Ties resolve to the lowest maximizer; a constant
// image returns its constant value.
int otsu_threshold(const GrayImage& img);

// Splits pixels at the threshold ({<= t} vs {> t}) and marks the minority
// side as ink (1). On an exact tie the darker side is ink. A constant image
// comes out all background.
BinaryImage binarize(const GrayImage& img, int threshold);

// Tight bounding box of the foreground, padded to a square with symmetric
// background margins (odd leftover goes to bottom/right). Throws EmptyGlyph
// when there is no foreground pixel.
BinaryImage crop_to_bounding_box(const BinaryImage& img);

// Nearest-neighbor resample of a square binary image to 32x32.
// Source index map: src = floor((dst + 0.5) * side / 32), clamped.
NormalizedGlyph resize_to_32(const BinaryImage& img);

// Nearest-neighbor resample of a grayscale image (same index map as
// resize_to_32); used for corpora that arrive pre-sized.
GrayImage resize_gray(const GrayImage& img, int out_width, int out_height);

// otsu_threshold -> binarize -> crop_to_bounding_box -> resize_to_32.
NormalizedGlyph preprocess_pipeline(const GrayImage& img);

} // namespace lpdpl

#endif
