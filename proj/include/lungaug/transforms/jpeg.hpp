#pragma once

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <jpeglib.h>

#include "lungaug/core/error.hpp"
#include "lungaug/core/raster.hpp"

namespace lungaug {

namespace detail {

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

inline void jpeg_silence(j_common_ptr, int) {}

// Same setjmp discipline as the PNG codec: output buffers live in the caller.
inline std::string jpeg_encode_raw(const std::uint8_t* pixels, int width, int height, int quality,
                                   std::vector<std::uint8_t>* out, JpegErrorManager* err) {
  jpeg_compress_struct cinfo;
  unsigned char* mem = nullptr;
  unsigned long mem_size = 0;
  cinfo.err = jpeg_std_error(&err->base);
  err->base.error_exit = jpeg_error_exit;
  err->base.emit_message = jpeg_silence;
  if (setjmp(err->jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(mem);
    return err->message;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &mem, &mem_size);
  cinfo.image_width = static_cast<JDIMENSION>(width);
  cinfo.image_height = static_cast<JDIMENSION>(height);
  cinfo.input_components = 1;
  cinfo.in_color_space = JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = const_cast<JSAMPROW>(pixels + static_cast<std::size_t>(cinfo.next_scanline) * width);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  out->assign(mem, mem + mem_size);
  jpeg_destroy_compress(&cinfo);
  std::free(mem);
  return {};
}

inline std::string jpeg_decode_raw(const std::vector<std::uint8_t>& bytes, int width, int height,
                                   std::uint8_t* pixels, JpegErrorManager* err) {
  jpeg_decompress_struct cinfo;
  cinfo.err = jpeg_std_error(&err->base);
  err->base.error_exit = jpeg_error_exit;
  err->base.emit_message = jpeg_silence;
  if (setjmp(err->jump)) {
    jpeg_destroy_decompress(&cinfo);
    return err->message;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_GRAYSCALE;
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_start_decompress(&cinfo);
  if (static_cast<int>(cinfo.output_width) != width ||
      static_cast<int>(cinfo.output_height) != height || cinfo.output_components != 1) {
    jpeg_destroy_decompress(&cinfo);
    return "unexpected decoded geometry";
  }
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels + static_cast<std::size_t>(cinfo.output_scanline) * width;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return {};
}

}  // namespace detail

// Lossy encode/decode cycle at the given JPEG quality (1..100).
inline Image jpeg_roundtrip(const Image& src, int quality) {
  if (quality < 1 || quality > 100) throw validation_error("jpeg quality must be in 1..100");
  std::vector<std::uint8_t> encoded;
  detail::JpegErrorManager err{};
  auto msg = detail::jpeg_encode_raw(src.pixels().data(), src.width(), src.height(), quality,
                                     &encoded, &err);
  if (!msg.empty()) throw data_error("JPEG encode failure: " + msg);
  std::vector<std::uint8_t> pixels(src.size());
  msg = detail::jpeg_decode_raw(encoded, src.width(), src.height(), pixels.data(), &err);
  if (!msg.empty()) throw data_error("JPEG decode failure: " + msg);
  return Image(src.width(), src.height(), std::move(pixels));
}

}  // namespace lungaug
