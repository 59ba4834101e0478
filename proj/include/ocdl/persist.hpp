#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ocdl/trainer.hpp"
#include "ocdl/types.hpp"

namespace ocdl {

inline constexpr std::uint32_t kCheckpointVersion = 1;
/// magic, version, algorithm, K, H, W, m, N, lambda, rho0
inline constexpr std::size_t kCheckpointHeaderBytes = 4 + 4 + 1 + 4 * 4 + 8 + 8 + 8;
inline constexpr std::size_t kRngStateBytes = 4 * 8;

/// Exact byte size of a checkpoint:
///   header + rng + 8 K (m^2 + 3 H W).
std::uint64_t checkpoint_size(std::size_t filters, std::size_t height, std::size_t width, std::size_t side);

/// Little-endian binary container. Written to a sibling temp file and
/// renamed into place.
void save_checkpoint(const TrainerState& state, const std::filesystem::path& path);
TrainerState load_checkpoint(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_checkpoint(const TrainerState& state);
TrainerState decode_checkpoint(const std::vector<std::uint8_t>& bytes);

/// Per-filter min-max scaling to [0, 255] (flat filters become 128), tiles
/// laid out row-major with `cols` per row and 1-pixel separators around
/// and between tiles. Written as 8-bit grayscale PNG.
struct TileLayout {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t height = 0;
  std::size_t width = 0;
};
TileLayout tile_layout(std::size_t filters, std::size_t side, std::size_t cols);
std::vector<std::uint8_t> render_dictionary_tiles(const FilterBank& dictionary, std::size_t cols,
                                                  TileLayout* layout = nullptr);
TileLayout export_dictionary_tiles(const FilterBank& dictionary, const std::filesystem::path& path,
                                   std::size_t cols);

/// CSV with a header line, written on first append.
void append_metrics(const MetricsRow& row, const std::filesystem::path& path);
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

/// Raw plane file: "OCPL", u32 H, u32 W, H*W little-endian doubles.
void save_plane(const ImagePlane& plane, const std::filesystem::path& path);
ImagePlane load_plane(const std::filesystem::path& path);

}  // namespace ocdl
