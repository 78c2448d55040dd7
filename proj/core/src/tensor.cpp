#include "apro/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apro/errors.hpp"

namespace apro {

namespace {

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

std::string dims(std::size_t a, std::size_t b, std::size_t c) {
  return std::to_string(a) + "x" + std::to_string(b) + "x" + std::to_string(c);
}

}  // namespace

GuideTensor::GuideTensor(std::size_t height, std::size_t width, std::size_t channels,
                         std::vector<double> values, Normalization norm)
    : height_(height), width_(width), channels_(channels), values_(std::move(values)), norm_(norm) {
  validate();
}

GuideTensor::GuideTensor(std::size_t height, std::size_t width, std::size_t channels)
    : height_(height), width_(width), channels_(channels), values_(height * width * channels, 0.0) {
  validate();
}

void GuideTensor::validate() const {
  if (height_ == 0 || width_ == 0 || channels_ == 0) {
    throw ValidationError("guide tensor must be non-empty, got " + dims(height_, width_, channels_));
  }
  if (values_.size() != height_ * width_ * channels_) {
    throw ValidationError("guide tensor " + dims(height_, width_, channels_) + " holds " +
                          std::to_string(values_.size()) + " values");
  }
  if (!all_finite(values_)) {
    throw ValidationError("guide tensor contains non-finite values");
  }
}

GuideTensor normalize_min_max(const GuideTensor& guide) {
  guide.validate();
  const auto values = guide.values();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double low = *lo;
  const double span = *hi - *lo;
  std::vector<double> out(values.size(), 0.0);
  if (span > 0.0) {
    std::transform(values.begin(), values.end(), out.begin(),
                   [&](double v) { return (v - low) / span; });
  }
  return GuideTensor(guide.height(), guide.width(), guide.channels(), std::move(out),
                     Normalization::min_max);
}

DenseField::DenseField(std::size_t channels, std::size_t height, std::size_t width)
    : channels_(channels), height_(height), width_(width), values_(channels * height * width, 0.0) {
  validate();
}

DenseField::DenseField(std::size_t channels, std::size_t height, std::size_t width,
                       std::vector<double> values)
    : channels_(channels), height_(height), width_(width), values_(std::move(values)) {
  validate();
}

void DenseField::validate() const {
  if (height_ == 0 || width_ == 0 || channels_ == 0) {
    throw ValidationError("dense field must be non-empty, got " + dims(channels_, height_, width_));
  }
  if (values_.size() != channels_ * height_ * width_) {
    throw ValidationError("dense field " + dims(channels_, height_, width_) + " holds " +
                          std::to_string(values_.size()) + " values");
  }
  if (!all_finite(values_)) {
    throw ValidationError("dense field contains non-finite values");
  }
}

void require_aligned(const GuideTensor& guide, const DenseField& field, const char* what) {
  if (guide.height() != field.height() || guide.width() != field.width()) {
    throw ValidationError(std::string(what) + ": guide is " + std::to_string(guide.height()) + "x" +
                          std::to_string(guide.width()) + " but field is " +
                          std::to_string(field.height()) + "x" + std::to_string(field.width()));
  }
}

}  // namespace apro
