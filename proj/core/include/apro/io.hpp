#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "apro/labeler.hpp"
#include "apro/tensor.hpp"

namespace apro::io {

enum class NpyDtype { float32, float64, uint8, boolean, int32, int64 };

/// Little-endian C-order array as stored in an NPY v1.0 file; values widened to double.
struct NpyArray {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  NpyDtype dtype = NpyDtype::float64;
};

/// The exact v1.0 preamble numpy writes (magic, version, length, padded dict, newline).
std::string npy_header(NpyDtype dtype, std::span<const std::size_t> shape);

NpyArray read_npy(const std::filesystem::path& path);
/// Only float32 and float64 are writable.
void write_npy(const std::filesystem::path& path, std::span<const std::size_t> shape,
               std::span<const double> data, NpyDtype dtype);

/// 8-bit grayscale or RGB PNG (alpha dropped, 16-bit reduced to 8), as H x W x C
/// values divided by 255.
GuideTensor read_png_guide(const std::filesystem::path& path);
/// Writes 8-bit gray (C = 1) or RGB (C = 3) from values in [0, 255].
void write_png8(const std::filesystem::path& path, std::size_t height, std::size_t width,
                std::size_t channels, std::span<const std::uint8_t> pixels);

/// Binary 16-bit PGM (P5, maxval 65535); `values` are clamped to [0, 1] and
/// scaled by 65535 with round-half-away-from-zero.
void write_pgm16(const std::filesystem::path& path, std::size_t height, std::size_t width,
                 std::span<const double> values);
/// Returns the raw 16-bit samples of a P5 file with maxval 65535.
std::vector<std::uint16_t> read_pgm16(const std::filesystem::path& path, std::size_t& height,
                                      std::size_t& width);

/// Guide from .png or .npy (float, H x W or H x W x C, no rescaling).
GuideTensor load_guide(const std::filesystem::path& path);

/// Field from .npy shaped K x H x W (or H x W for K = 1). `dtype` receives the stored type.
DenseField load_field(const std::filesystem::path& path, NpyDtype* dtype = nullptr);
void save_field(const std::filesystem::path& path, const DenseField& field, NpyDtype dtype);

/// Mask from .npy or .png shaped H x W; nonzero entries mark unlabeled pixels.
RegionMask load_mask(const std::filesystem::path& path);

}  // namespace apro::io
