#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace apro {

/// Row-major pixel id: y * width + x.
using NodeId = std::uint32_t;

/// How raw guide values were mapped onto the working range.
enum class Normalization { none, divide_by_255, min_max };

/// H x W x C guide (image or feature map), pixel-interleaved.
///
/// All pairwise affinities are computed from this tensor. Values are finite;
/// after ingestion they are expected to live in [0, 1].
class GuideTensor {
 public:
  GuideTensor() = default;
  GuideTensor(std::size_t height, std::size_t width, std::size_t channels,
              std::vector<double> values, Normalization norm = Normalization::none);

  /// Zero-filled guide.
  GuideTensor(std::size_t height, std::size_t width, std::size_t channels);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t pixels() const noexcept { return height_ * width_; }
  Normalization normalization() const noexcept { return norm_; }

  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return values_[(y * width_ + x) * channels_ + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return values_[(y * width_ + x) * channels_ + c];
  }

  /// The C values of one pixel.
  std::span<const double> pixel(std::size_t node) const {
    return {values_.data() + node * channels_, channels_};
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// Throws ValidationError on empty dimensions, size mismatch or non-finite values.
  void validate() const;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> values_;
  Normalization norm_ = Normalization::none;
};

/// Rescales every channel jointly to [0, 1]; a constant guide maps to zeros.
GuideTensor normalize_min_max(const GuideTensor& guide);

/// K x H x W score field, channel-major (one contiguous plane per channel).
class DenseField {
 public:
  DenseField() = default;
  DenseField(std::size_t channels, std::size_t height, std::size_t width);
  DenseField(std::size_t channels, std::size_t height, std::size_t width,
             std::vector<double> values);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t pixels() const noexcept { return height_ * width_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& at(std::size_t k, std::size_t y, std::size_t x) {
    return values_[(k * height_ + y) * width_ + x];
  }
  double at(std::size_t k, std::size_t y, std::size_t x) const {
    return values_[(k * height_ + y) * width_ + x];
  }

  std::span<double> plane(std::size_t k) {
    return {values_.data() + k * pixels(), pixels()};
  }
  std::span<const double> plane(std::size_t k) const {
    return {values_.data() + k * pixels(), pixels()};
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  void validate() const;

  bool operator==(const DenseField&) const = default;

 private:
  std::size_t channels_ = 0;
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> values_;
};

/// Throws ValidationError unless the guide and field share H and W.
void require_aligned(const GuideTensor& guide, const DenseField& field, const char* what);

}  // namespace apro
