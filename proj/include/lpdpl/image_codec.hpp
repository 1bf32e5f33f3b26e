#ifndef LPDPL_IMAGE_CODEC_HPP
#define LPDPL_IMAGE_CODEC_HPP

#include <filesystem>

#include "lpdpl/image.hpp"

namespace lpdpl {

// Decodes a PGM (P2/P5) or PNG file to 8-bit grayscale; color PNG input is
// converted by luminance. Throws DecodeError / IoError.
GrayImage decode_image(const std::filesystem::path& path);

// Binary PGM writer, used by tests and tooling.
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

// 8-bit grayscale PNG writer.
void write_png(const std::filesystem::path& path, const GrayImage& img);

} // namespace lpdpl

#endif
