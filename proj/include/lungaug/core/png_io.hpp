#pragma once

#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <png.h>

#include "lungaug/core/error.hpp"
#include "lungaug/core/raster.hpp"

namespace lungaug {

namespace detail {

// libpng reports errors by longjmp. The functions that call setjmp keep only
// trivially destructible locals; every buffer they fill lives in the caller.

struct PngErrorSink {
  std::jmp_buf* jump = nullptr;
  char message[256] = {};
};

inline void png_error_handler(png_structp png, png_const_charp msg) {
  auto* sink = static_cast<PngErrorSink*>(png_get_error_ptr(png));
  std::strncpy(sink->message, msg ? msg : "libpng error", sizeof(sink->message) - 1);
  png_longjmp(png, 1);
}

inline void png_warning_handler(png_structp, png_const_charp) {}

struct PngSource {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

inline void png_read_from_memory(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
  if (src->pos + n > src->size) png_error(png, "truncated PNG stream");
  std::memcpy(out, src->data + src->pos, n);
  src->pos += n;
}

inline void png_write_to_vector(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

inline void png_flush_noop(png_structp) {}

struct DecodedGray {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

// Returns an empty string on success, otherwise the failure reason.
inline std::string decode_png_gray_raw(const std::uint8_t* data, std::size_t size,
                                       DecodedGray* out, PngErrorSink* sink,
                                       std::vector<png_bytep>* rows) {
  if (size < 8 || png_sig_cmp(data, 0, 8) != 0) return "not a PNG stream";
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, sink, png_error_handler,
                                           png_warning_handler);
  if (!png) return "png_create_read_struct failed";
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return "png_create_info_struct failed";
  }
  PngSource src{data, size, 0};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return sink->message;
  }
  png_set_read_fn(png, &src, png_read_from_memory);
  png_read_info(png, info);
  const auto color_type = png_get_color_type(png, info);
  const auto bit_depth = png_get_bit_depth(png, info);
  if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth > 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    return "not an 8-bit single-channel grayscale PNG";
  }
  if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  out->width = static_cast<int>(png_get_image_width(png, info));
  out->height = static_cast<int>(png_get_image_height(png, info));
  out->pixels.resize(static_cast<std::size_t>(out->width) * out->height);
  rows->resize(out->height);
  for (int y = 0; y < out->height; ++y)
    (*rows)[y] = out->pixels.data() + static_cast<std::size_t>(y) * out->width;
  png_read_image(png, rows->data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return {};
}

inline std::string encode_png_gray_raw(const std::uint8_t* pixels, int width, int height,
                                       std::vector<std::uint8_t>* out, PngErrorSink* sink) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, sink, png_error_handler,
                                            png_warning_handler);
  if (!png) return "png_create_write_struct failed";
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return "png_create_info_struct failed";
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return sink->message;
  }
  png_set_write_fn(png, out, png_write_to_vector, png_flush_noop);
  // Fixed codec settings: identical rasters encode to identical bytes.
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_BASE,
               PNG_FILTER_TYPE_BASE);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(pixels + static_cast<std::size_t>(y) * width));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return {};
}

}  // namespace detail

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path,
                             std::span<const std::uint8_t> bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("short write to " + path.string());
}

template <typename Tag>
Raster<Tag> decode_png(std::span<const std::uint8_t> bytes, const std::string& what = "PNG") {
  detail::DecodedGray decoded;
  detail::PngErrorSink sink;
  std::vector<png_bytep> rows;
  const auto err = detail::decode_png_gray_raw(bytes.data(), bytes.size(), &decoded, &sink, &rows);
  if (!err.empty()) throw data_error("decode failure in " + what + ": " + err);
  return Raster<Tag>(decoded.width, decoded.height, std::move(decoded.pixels));
}

template <typename Tag>
std::vector<std::uint8_t> encode_png(const Raster<Tag>& raster) {
  std::vector<std::uint8_t> out;
  detail::PngErrorSink sink;
  const auto err = detail::encode_png_gray_raw(raster.pixels().data(), raster.width(),
                                               raster.height(), &out, &sink);
  if (!err.empty()) throw io_error("PNG encode failure: " + err);
  return out;
}

template <typename Tag>
Raster<Tag> read_png(const std::filesystem::path& path) {
  return decode_png<Tag>(read_file_bytes(path), path.string());
}

template <typename Tag>
void write_png(const Raster<Tag>& raster, const std::filesystem::path& path) {
  write_file_bytes(path, encode_png(raster));
}

}  // namespace lungaug
