#include "lpdpl/image_codec.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <string>

#include <png.h>

namespace lpdpl {

namespace {

int next_pnm_token(std::istream& in) {
  // Skips whitespace and '#' comment lines, then reads one integer.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) throw DecodeError("pgm: malformed header token");
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

GrayImage decode_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5'))
    throw DecodeError("pgm: bad magic in " + path.string());
  const bool binary = magic[1] == '5';

  const int width = next_pnm_token(in);
  const int height = next_pnm_token(in);
  const int maxval = next_pnm_token(in);
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
    throw DecodeError("pgm: bad dimensions in " + path.string());

  GrayImage img(width, height);
  const std::size_t count = img.data.size();
  if (binary) {
    if (maxval < 256) {
      in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(count));
      if (static_cast<std::size_t>(in.gcount()) != count)
        throw DecodeError("pgm: truncated pixel data in " + path.string());
    } else {
      std::vector<unsigned char> raw(count * 2);
      in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
      if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw DecodeError("pgm: truncated pixel data in " + path.string());
      for (std::size_t i = 0; i < count; ++i) {
        const int v = raw[2 * i] * 256 + raw[2 * i + 1];
        img.data[i] = static_cast<std::uint8_t>(v * 255 / maxval);
      }
      return img;
    }
    if (maxval != 255)
      for (auto& v : img.data) v = static_cast<std::uint8_t>(v * 255 / maxval);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const int v = next_pnm_token(in);
      if (v > maxval) throw DecodeError("pgm: pixel exceeds maxval in " + path.string());
      img.data[i] = static_cast<std::uint8_t>(v * 255 / maxval);
    }
  }
  return img;
}

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* file = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (file) std::fclose(file);
  }
};

GrayImage decode_png(const std::filesystem::path& path) {
  PngReadCloser ctx;
  ctx.file = std::fopen(path.string().c_str(), "rb");
  if (!ctx.file) throw IoError("cannot open " + path.string());

  unsigned char header[8];
  if (std::fread(header, 1, 8, ctx.file) != 8 || png_sig_cmp(header, 0, 8))
    throw DecodeError("png: bad signature in " + path.string());

  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw DecodeError("png: init failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw DecodeError("png: init failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw DecodeError("png: decode error in " + path.string());

  png_init_io(ctx.png, ctx.file);
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);

  const png_uint_32 width = png_get_image_width(ctx.png, ctx.info);
  const png_uint_32 height = png_get_image_height(ctx.png, ctx.info);
  const png_byte color = png_get_color_type(ctx.png, ctx.info);
  const png_byte depth = png_get_bit_depth(ctx.png, ctx.info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
  if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(ctx.png);
  if (depth == 16) png_set_scale_16(ctx.png);
  if (color & PNG_COLOR_MASK_ALPHA || color == PNG_COLOR_TYPE_PALETTE)
    png_set_strip_alpha(ctx.png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
      color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray(ctx.png, 1, -1.0, -1.0);
  png_read_update_info(ctx.png, ctx.info);

  GrayImage img(static_cast<int>(width), static_cast<int>(height));
  std::vector<png_bytep> rows(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = img.data.data() + r * width;
  png_read_image(ctx.png, rows.data());
  return img;
}

} // namespace

GrayImage decode_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path.string());
  char magic[2] = {0, 0};
  probe.read(magic, 2);
  probe.close();

  if (magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) return decode_pgm(path);
  if (static_cast<unsigned char>(magic[0]) == 0x89 && magic[1] == 'P') return decode_png(path);
  throw DecodeError("unsupported image format: " + path.string());
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

struct PngWriteCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  std::FILE* file = nullptr;
  ~PngWriteCloser() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (file) std::fclose(file);
  }
};

} // namespace

void write_png(const std::filesystem::path& path, const GrayImage& img) {
  PngWriteCloser ctx;
  ctx.file = std::fopen(path.string().c_str(), "wb");
  if (!ctx.file) throw IoError("cannot write " + path.string());

  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw IoError("png: init failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw IoError("png: init failed");
  if (setjmp(png_jmpbuf(ctx.png))) throw IoError("png: write error for " + path.string());

  png_init_io(ctx.png, ctx.file);
  png_set_IHDR(ctx.png, ctx.info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  std::vector<png_bytep> rows(img.height);
  for (int r = 0; r < img.height; ++r)
    rows[r] = const_cast<png_bytep>(img.data.data() + static_cast<std::size_t>(r) * img.width);
  png_write_image(ctx.png, rows.data());
  png_write_end(ctx.png, nullptr);
}

} // namespace lpdpl
