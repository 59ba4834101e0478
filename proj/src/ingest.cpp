#include "ocdl/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>

#include "ocdl/image_io.hpp"
#include "ocdl/rng.hpp"
#include "ocdl/spectral.hpp"

namespace ocdl {

namespace {

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

double mean(const ImagePlane& p) {
  return std::accumulate(p.values().begin(), p.values().end(), 0.0) / static_cast<double>(p.size());
}

bool supported_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".pgm";
}

// |1 - exp(-2 pi i k / n)|^2
double diff_gain(std::size_t k, std::size_t n) {
  return 2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
}

}  // namespace

ImagePlane load_grayscale(const std::filesystem::path& path, const LoadOptions& options) {
  const Raster raster = read_raster(path);
  double full = 255.0;
  if (raster.bit_depth > 8) {
    if (!options.allow_16bit) {
      throw FormatError("'" + path.string() + "': " + std::to_string(raster.bit_depth) +
                        "-bit samples need explicit 16-bit support");
    }
    full = 65535.0;
  }
  ImagePlane out(raster.height, raster.width);
  const auto ch = static_cast<std::size_t>(raster.channels);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint16_t* px = raster.samples.data() + i * ch;
    if (ch >= 3) {
      out[i] = (kLumaR * px[0] + kLumaG * px[1] + kLumaB * px[2]) / full;
    } else {
      out[i] = px[0] / full;
    }
  }
  return out;
}

HighpassSplit tikhonov_highpass(const ImagePlane& signal, double reg) {
  if (!(reg > 0.0)) throw InvalidArgument("highpass regularization must be positive");
  const std::size_t h = signal.height();
  const std::size_t w = signal.width();
  SpectrumPlane spec = forward_dft(signal);
  for (std::size_t r = 0; r < h; ++r) {
    const double gr = diff_gain(r, h);
    for (std::size_t c = 0; c < w; ++c) spec(r, c) /= 1.0 + reg * (gr + diff_gain(c, w));
  }
  HighpassSplit split;
  split.lowpass = inverse_dft_real(spec);
  split.highpass = signal;
  for (std::size_t i = 0; i < signal.size(); ++i) split.highpass[i] -= split.lowpass[i];
  return split;
}

ImagePlane center_crop_resize(const ImagePlane& source, std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) throw InvalidArgument("target size must be positive");
  if (source.height() < 8 || source.width() < 8) {
    throw InvalidArgument("source image is smaller than 8x8");
  }
  if (source.height() == height && source.width() == width) return source;

  // Largest centered window with the target aspect ratio.
  const double target_aspect = static_cast<double>(width) / static_cast<double>(height);
  std::size_t crop_h = source.height();
  std::size_t crop_w = source.width();
  if (static_cast<double>(crop_w) / static_cast<double>(crop_h) > target_aspect) {
    crop_w = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(crop_h * target_aspect)));
  } else {
    crop_h = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(crop_w / target_aspect)));
  }
  const std::size_t off_r = (source.height() - crop_h) / 2;
  const std::size_t off_c = (source.width() - crop_w) / 2;

  const double sy = static_cast<double>(crop_h) / static_cast<double>(height);
  const double sx = static_cast<double>(crop_w) / static_cast<double>(width);
  auto sample = [&](double y, double x) {
    y = std::clamp(y, 0.0, static_cast<double>(crop_h - 1));
    x = std::clamp(x, 0.0, static_cast<double>(crop_w - 1));
    const auto y0 = static_cast<std::size_t>(std::floor(y));
    const auto x0 = static_cast<std::size_t>(std::floor(x));
    const std::size_t y1 = std::min(y0 + 1, crop_h - 1);
    const std::size_t x1 = std::min(x0 + 1, crop_w - 1);
    const double fy = y - static_cast<double>(y0);
    const double fx = x - static_cast<double>(x0);
    const double top = (1.0 - fx) * source(off_r + y0, off_c + x0) + fx * source(off_r + y0, off_c + x1);
    const double bot = (1.0 - fx) * source(off_r + y1, off_c + x0) + fx * source(off_r + y1, off_c + x1);
    return (1.0 - fy) * top + fy * bot;
  };

  ImagePlane out(height, width);
  for (std::size_t r = 0; r < height; ++r) {
    const double y = (static_cast<double>(r) + 0.5) * sy - 0.5;
    for (std::size_t c = 0; c < width; ++c) {
      out(r, c) = sample(y, (static_cast<double>(c) + 0.5) * sx - 0.5);
    }
  }
  return out;
}

DirectorySource::DirectorySource(const std::filesystem::path& root, PreprocessOptions options)
    : options_(std::move(options)) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw ConfigError("data directory '" + root.string() + "' does not exist");
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_regular_file() && supported_extension(entry.path())) files_.push_back(entry.path());
  }
  if (files_.empty()) {
    throw ConfigError("data directory '" + root.string() + "' contains no PNG or PGM images");
  }
  std::sort(files_.begin(), files_.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  if (options_.shuffle_seed) {
    Rng rng(*options_.shuffle_seed);
    for (std::size_t i = files_.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
      std::swap(files_[i], files_[j]);
    }
  }
  if (options_.highpass && !(options_.highpass_reg > 0.0)) {
    throw ConfigError("highpass regularization must be positive");
  }
}

ImagePlane DirectorySource::load(std::size_t index) const {
  PreprocessRecord record;
  return load(index, record);
}

ImagePlane DirectorySource::load(std::size_t index, PreprocessRecord& record) const {
  const auto& path = files_.at(index);
  try {
    ImagePlane img = load_grayscale(path, options_.load);
    record.path = path.string();
    record.original_height = img.height();
    record.original_width = img.width();
    record.mean_before = mean(img);
    if (options_.height != 0 && options_.width != 0 &&
        (img.height() != options_.height || img.width() != options_.width)) {
      img = center_crop_resize(img, options_.height, options_.width);
      record.resized = true;
    }
    if (options_.highpass) img = tikhonov_highpass(img, options_.highpass_reg).highpass;
    record.mean_after = mean(img);
    return img;
  } catch (const InvalidArgument& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

std::vector<ImagePlane> stream(const ImageSource& source) {
  std::vector<ImagePlane> out;
  out.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) out.push_back(source.load(i));
  return out;
}

}  // namespace ocdl
