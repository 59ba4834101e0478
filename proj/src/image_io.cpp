#include "ocdl/image_io.hpp"

#include <png.h>

#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "ocdl/types.hpp"

namespace ocdl {

namespace {

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode), &std::fclose);
  if (!f) throw IoError("cannot open '" + path.string() + "'");
  return f;
}

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
  auto* out = static_cast<std::string*>(png_get_error_ptr(png));
  if (out != nullptr) *out = msg;
  png_longjmp(png, 1);
}

// Everything mutated after setjmp lives on the heap behind a pointer that is
// fixed before setjmp, so nothing is indeterminate after png_longjmp.
struct PngReadContext {
  std::string error;
  Raster raster;
  std::vector<std::uint8_t> buffer;
  std::vector<png_bytep> rows;
};

Raster read_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  auto ctx = std::make_unique<PngReadContext>();
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx->error, png_fail, nullptr);
  if (png == nullptr) throw FormatError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("'" + path.string() + "': invalid PNG (" + ctx->error + ")");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);

  Raster& raster = ctx->raster;
  raster.width = png_get_image_width(png, info);
  raster.height = png_get_image_height(png, info);
  raster.channels = png_get_channels(png, info);
  raster.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  ctx->buffer.resize(rowbytes * raster.height);
  ctx->rows.resize(raster.height);
  for (std::size_t r = 0; r < raster.height; ++r) ctx->rows[r] = ctx->buffer.data() + r * rowbytes;
  png_read_image(png, ctx->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const auto& buffer = ctx->buffer;
  const std::size_t count = raster.width * raster.height * static_cast<std::size_t>(raster.channels);
  raster.samples.resize(count);
  if (raster.bit_depth == 16) {
    // PNG stores 16-bit samples big-endian.
    for (std::size_t i = 0; i < count; ++i) {
      raster.samples[i] = static_cast<std::uint16_t>((buffer[2 * i] << 8) | buffer[2 * i + 1]);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) raster.samples[i] = buffer[i];
  }
  return std::move(ctx->raster);
}

Raster read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  auto next_token = [&]() {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
      if (ch == '#') {
        while ((ch = in.get()) != EOF && ch != '\n') {
        }
        continue;
      }
      if (std::isspace(ch)) {
        if (!tok.empty()) break;
        continue;
      }
      tok.push_back(static_cast<char>(ch));
    }
    return tok;
  };
  if (next_token() != "P5") throw FormatError("'" + path.string() + "': not a binary PGM");
  Raster raster;
  unsigned long maxval = 0;
  try {
    raster.width = std::stoul(next_token());
    raster.height = std::stoul(next_token());
    maxval = std::stoul(next_token());
  } catch (const std::exception&) {
    throw FormatError("'" + path.string() + "': malformed PGM header");
  }
  if (raster.width == 0 || raster.height == 0 || maxval == 0 || maxval > 65535) {
    throw FormatError("'" + path.string() + "': invalid PGM dimensions or maxval");
  }
  raster.channels = 1;
  raster.bit_depth = maxval > 255 ? 16 : 8;
  const std::size_t count = raster.width * raster.height;
  const std::size_t bytes = count * (raster.bit_depth == 16 ? 2 : 1);
  std::vector<unsigned char> buf(bytes);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) {
    throw FormatError("'" + path.string() + "': truncated PGM data");
  }
  raster.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    raster.samples[i] = raster.bit_depth == 16
                            ? static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1])
                            : buf[i];
  }
  return raster;
}

}  // namespace

Raster read_raster(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open '" + path.string() + "'");
  std::array<unsigned char, 8> sig{};
  probe.read(reinterpret_cast<char*>(sig.data()), sig.size());
  const auto got = static_cast<std::size_t>(probe.gcount());
  probe.close();
  if (got == 8 && png_sig_cmp(sig.data(), 0, 8) == 0) return read_png(path);
  if (got >= 2 && sig[0] == 'P' && sig[1] == '5') return read_pgm(path);
  throw FormatError("'" + path.string() + "': unsupported raster format (expected PNG or P5 PGM)");
}

void write_png8(const std::filesystem::path& path, std::size_t width, std::size_t height, int channels,
                const std::vector<std::uint8_t>& pixels) {
  const int color_type = channels == 1   ? PNG_COLOR_TYPE_GRAY
                         : channels == 2 ? PNG_COLOR_TYPE_GRAY_ALPHA
                         : channels == 3 ? PNG_COLOR_TYPE_RGB
                         : channels == 4 ? PNG_COLOR_TYPE_RGB_ALPHA
                                         : -1;
  if (color_type < 0) throw InvalidArgument("PNG channel count must be 1..4");
  const std::size_t stride = width * static_cast<std::size_t>(channels);
  if (pixels.size() != stride * height) throw InvalidArgument("pixel count does not match size");
  FilePtr file = open_file(path, "wb");
  auto error = std::make_unique<std::string>();
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, error.get(), png_fail, nullptr);
  if (png == nullptr) throw IoError("libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("'" + path.string() + "': PNG write failed (" + *error + ")");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < height; ++r) {
    png_write_row(png, const_cast<png_bytep>(pixels.data() + r * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void write_png_gray8(const std::filesystem::path& path, std::size_t width, std::size_t height,
                     const std::vector<std::uint8_t>& pixels) {
  write_png8(path, width, height, 1, pixels);
}

void write_pgm_gray8(const std::filesystem::path& path, std::size_t width, std::size_t height,
                     const std::vector<std::uint8_t>& pixels) {
  if (pixels.size() != width * height) throw InvalidArgument("pixel count does not match size");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace ocdl
