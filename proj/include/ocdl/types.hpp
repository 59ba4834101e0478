#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ocdl {

using Complex = std::complex<double>;

/// Raised when arguments violate an operation's preconditions
/// (dimension mismatch, non-positive penalty, oversized filter, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for malformed or unreadable files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user configuration: missing or empty data directory, invalid flags.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major H x W grid. `Plane<double>` is a spatial image or coefficient
/// map, `Plane<Complex>` a full (not half) DFT spectrum.
template <typename T>
class Plane {
 public:
  Plane() = default;
  Plane(std::size_t height, std::size_t width, T fill = T{})
      : height_(height), width_(width), values_(height * width, fill) {
    if (height == 0 || width == 0) {
      throw InvalidArgument("plane dimensions must be positive");
    }
  }
  Plane(std::size_t height, std::size_t width, std::vector<T> values)
      : height_(height), width_(width), values_(std::move(values)) {
    if (height == 0 || width == 0) {
      throw InvalidArgument("plane dimensions must be positive");
    }
    if (values_.size() != height * width) {
      throw InvalidArgument("plane value count does not match H*W");
    }
  }

  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const { return values_[row * width_ + col]; }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }
  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }

  bool same_shape(const Plane& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> values_;
};

using ImagePlane = Plane<double>;
using SpectrumPlane = Plane<Complex>;

/// One plane per filter: the coefficient maps x_k, or any K-plane stack.
using CoefficientMaps = std::vector<ImagePlane>;
/// One spectrum per filter (DFTs of maps or of zero-padded filters).
using SpectrumSet = std::vector<SpectrumPlane>;

/// An m x m filter support, row-major.
struct FilterSupport {
  std::size_t side = 0;
  std::vector<double> values;

  FilterSupport() = default;
  explicit FilterSupport(std::size_t m) : side(m), values(m * m, 0.0) {}
  FilterSupport(std::size_t m, std::vector<double> v) : side(m), values(std::move(v)) {
    if (values.size() != m * m) throw InvalidArgument("filter support must hold m*m values");
  }

  double& operator()(std::size_t r, std::size_t c) { return values[r * side + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * side + c]; }

  friend bool operator==(const FilterSupport&, const FilterSupport&) = default;
};

/// K filters sharing one support size m. Feasible when every filter has
/// l2 norm at most one.
struct FilterBank {
  std::size_t side = 0;
  std::vector<FilterSupport> filters;

  std::size_t size() const { return filters.size(); }
  friend bool operator==(const FilterBank&, const FilterBank&) = default;
};

double norm2(std::span<const double> v);
double squared_norm(std::span<const double> v);

/// True when all filters satisfy ||d_k|| <= 1 + tol and are finite.
bool is_feasible(const FilterBank& bank, double tol = 1e-12);

/// Throws InvalidArgument if any value is NaN or infinite.
void require_finite(const ImagePlane& plane, const char* what);

}  // namespace ocdl
