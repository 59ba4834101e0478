#pragma once

#include <string>
#include <vector>

#include "ocdl/types.hpp"

namespace ocdl {

/// An ordered, re-readable sequence of training or test images.
class ImageSource {
 public:
  virtual ~ImageSource() = default;
  virtual std::size_t size() const = 0;
  /// Loads (and preprocesses) image i. Failures throw with the image name.
  virtual ImagePlane load(std::size_t index) const = 0;
  virtual std::string name(std::size_t index) const = 0;
};

class MemorySource final : public ImageSource {
 public:
  MemorySource() = default;
  explicit MemorySource(std::vector<ImagePlane> images) : images_(std::move(images)) {}

  std::size_t size() const override { return images_.size(); }
  ImagePlane load(std::size_t index) const override { return images_.at(index); }
  std::string name(std::size_t index) const override { return "image[" + std::to_string(index) + "]"; }

  void push_back(ImagePlane image) { images_.push_back(std::move(image)); }

 private:
  std::vector<ImagePlane> images_;
};

}  // namespace ocdl
