#pragma once

#include <png.h>

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "woundambit/error.hpp"
#include "woundambit/mask.hpp"
#include "woundambit/raster.hpp"

// PNG codec on top of libpng's simplified API. Transparent pixels are composited onto
// black, so masks with an alpha channel read as background where transparent.

namespace woundambit {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw io_error("failed reading " + path.string());
  return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("failed writing " + path.string());
}

namespace detail {

struct DecodedPng {
  int width = 0;
  int height = 0;
  bool color = false;
  bool alpha = false;
  std::vector<std::uint8_t> data;  ///< GRAY[A] or RGB[A], 8 bit
};

inline DecodedPng decode_png(std::span<const std::uint8_t> bytes, const std::string& what) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw io_error("cannot decode PNG " + what + ": " + msg);
  }
  DecodedPng out;
  out.color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  out.alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  image.format = out.color ? (out.alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB)
                           : (out.alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.data.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.data.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw io_error("cannot decode PNG " + what + ": " + msg);
  }
  if (out.width < 1 || out.height < 1) throw io_error("PNG " + what + " is empty");
  return out;
}

inline std::uint8_t over_black(std::uint8_t v, std::uint8_t a) {
  return static_cast<std::uint8_t>((v * a + 127) / 255);
}

template <typename Image>
std::vector<std::uint8_t> encode_png(const Image& img, png_uint_32 format) {
  if (img.width() < 1 || img.height() < 1) throw invalid_input_error("cannot encode an empty image");
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = format;
  png_alloc_size_t size = 0;
  const void* buffer = img.pixels().data();
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, buffer, 0, nullptr)) {
    throw io_error(std::string("PNG encoding failed: ") + image.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, buffer, 0, nullptr)) {
    throw io_error(std::string("PNG encoding failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

}  // namespace detail

/// Decodes to 8-bit grey; colour sources go through Rec. 601 luma.
inline GrayImage decode_png_gray(std::span<const std::uint8_t> bytes, const std::string& what = "buffer") {
  const auto d = detail::decode_png(bytes, what);
  GrayImage out(d.width, d.height);
  const int ch = (d.color ? 3 : 1) + (d.alpha ? 1 : 0);
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const std::uint8_t* s = &d.data[i * ch];
    std::uint8_t v = d.color ? luminance(Rgb{s[0], s[1], s[2]}) : s[0];
    if (d.alpha) v = detail::over_black(v, s[ch - 1]);
    px[i] = v;
  }
  return out;
}

inline RgbImage decode_png_rgb(std::span<const std::uint8_t> bytes, const std::string& what = "buffer") {
  const auto d = detail::decode_png(bytes, what);
  RgbImage out(d.width, d.height);
  const int ch = (d.color ? 3 : 1) + (d.alpha ? 1 : 0);
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const std::uint8_t* s = &d.data[i * ch];
    Rgb c = d.color ? Rgb{s[0], s[1], s[2]} : Rgb{s[0], s[0], s[0]};
    if (d.alpha) {
      const std::uint8_t a = s[ch - 1];
      c = {detail::over_black(c.r, a), detail::over_black(c.g, a), detail::over_black(c.b, a)};
    }
    px[i] = c;
  }
  return out;
}

inline GrayImage read_png_gray(const std::filesystem::path& path) {
  return decode_png_gray(read_file_bytes(path), path.string());
}

inline RgbImage read_png_rgb(const std::filesystem::path& path) {
  return decode_png_rgb(read_file_bytes(path), path.string());
}

inline BinaryMask read_mask_png(const std::filesystem::path& path, int threshold = kDefaultBinarizeThreshold) {
  return binarize(read_png_gray(path), threshold);
}

static_assert(sizeof(Rgb) == 3, "Rgb must be tightly packed for PNG encoding");

inline std::vector<std::uint8_t> encode_png(const GrayImage& img) {
  return detail::encode_png(img, PNG_FORMAT_GRAY);
}
inline std::vector<std::uint8_t> encode_png(const RgbImage& img) {
  return detail::encode_png(img, PNG_FORMAT_RGB);
}

template <typename Image>
void write_png(const std::filesystem::path& path, const Image& img) {
  write_file_bytes(path, encode_png(img));
}

inline void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  write_png(path, to_gray(mask));
}

}  // namespace woundambit
