#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace ocdl {

/// Decoded raster: interleaved samples, 1 (gray), 2 (gray+alpha),
/// 3 (RGB) or 4 (RGBA) channels, 8 or 16 bits per sample.
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  int channels = 1;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;
};

/// Reads PNG or binary PGM (P5), chosen by file signature.
Raster read_raster(const std::filesystem::path& path);

/// 8-bit PNG with 1 (gray), 2, 3 (RGB) or 4 interleaved channels.
void write_png8(const std::filesystem::path& path, std::size_t width, std::size_t height, int channels,
                const std::vector<std::uint8_t>& pixels);

void write_png_gray8(const std::filesystem::path& path, std::size_t width, std::size_t height,
                     const std::vector<std::uint8_t>& pixels);

/// Binary PGM (P5), maxval 255.
void write_pgm_gray8(const std::filesystem::path& path, std::size_t width, std::size_t height,
                     const std::vector<std::uint8_t>& pixels);

}  // namespace ocdl
