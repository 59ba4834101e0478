#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ocdl/dataset.hpp"
#include "ocdl/types.hpp"

namespace ocdl {

struct LoadOptions {
  /// 16-bit inputs are rejected unless set; they are then scaled by 1/65535.
  bool allow_16bit = false;
};

/// Decodes PNG (gray or RGB, alpha ignored) or binary PGM into [0, 1].
/// Color inputs use luma 0.299 R + 0.587 G + 0.114 B.
ImagePlane load_grayscale(const std::filesystem::path& path, const LoadOptions& options = {});

struct HighpassSplit {
  ImagePlane lowpass;
  ImagePlane highpass;
};

/// Tikhonov low-pass
///   argmin_l (1/2)||l - s||^2 + (reg/2)(||G_r l||^2 + ||G_c l||^2)
/// with circular forward differences, solved by one frequency-domain
/// division; highpass = s - lowpass.
HighpassSplit tikhonov_highpass(const ImagePlane& signal, double reg = 5.0);

/// Center-crops to the target aspect ratio and resizes bilinearly (pixel
/// centers at half-integers, edge samples clamped). Returns an exact copy
/// when the input is already height x width.
ImagePlane center_crop_resize(const ImagePlane& source, std::size_t height, std::size_t width);

struct PreprocessOptions {
  /// Target lattice; zero keeps each image's own size.
  std::size_t height = 0;
  std::size_t width = 0;
  bool highpass = true;
  double highpass_reg = 5.0;
  LoadOptions load;
  /// Seeded permutation of the lexicographic file order.
  std::optional<std::uint64_t> shuffle_seed;
};

struct PreprocessRecord {
  std::string path;
  std::size_t original_height = 0;
  std::size_t original_width = 0;
  bool resized = false;
  double mean_before = 0.0;
  double mean_after = 0.0;
};

/// Images in a directory (PNG and PGM, by extension), ordered by filename,
/// each loaded, cropped/resized and high-passed on demand.
class DirectorySource final : public ImageSource {
 public:
  DirectorySource(const std::filesystem::path& root, PreprocessOptions options);

  std::size_t size() const override { return files_.size(); }
  ImagePlane load(std::size_t index) const override;
  std::string name(std::size_t index) const override { return files_.at(index).string(); }

  /// Like load(), also reporting what preprocessing did.
  ImagePlane load(std::size_t index, PreprocessRecord& record) const;

  const std::vector<std::filesystem::path>& files() const { return files_; }
  const PreprocessOptions& options() const { return options_; }

 private:
  std::vector<std::filesystem::path> files_;
  PreprocessOptions options_;
};

/// Full preprocessing pass in stream order.
std::vector<ImagePlane> stream(const ImageSource& source);

}  // namespace ocdl
