#include "apro/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "apro/errors.hpp"

namespace apro::io {

static_assert(std::endian::native == std::endian::little, "NPY I/O assumes a little-endian host");

namespace {

constexpr char npy_magic[] = "\x93NUMPY";

std::string descr_of(NpyDtype dtype) {
  switch (dtype) {
    case NpyDtype::float32: return "<f4";
    case NpyDtype::float64: return "<f8";
    case NpyDtype::uint8: return "|u1";
    case NpyDtype::boolean: return "|b1";
    case NpyDtype::int32: return "<i4";
    case NpyDtype::int64: return "<i8";
  }
  return "";
}

std::size_t item_size(NpyDtype dtype) {
  switch (dtype) {
    case NpyDtype::float32: return 4;
    case NpyDtype::float64: return 8;
    case NpyDtype::uint8:
    case NpyDtype::boolean: return 1;
    case NpyDtype::int32: return 4;
    case NpyDtype::int64: return 8;
  }
  return 0;
}

std::string quoted_value(const std::string& dict, const std::string& key,
                         const std::filesystem::path& path) {
  const auto at = dict.find("'" + key + "'");
  if (at == std::string::npos) throw IoError(path.string() + ": NPY header lacks '" + key + "'");
  const auto colon = dict.find(':', at);
  if (colon == std::string::npos) throw IoError(path.string() + ": malformed NPY header");
  auto begin = dict.find_first_not_of(" ", colon + 1);
  return dict.substr(begin);
}

std::vector<std::size_t> parse_shape(const std::string& rest, const std::filesystem::path& path) {
  if (rest.empty() || rest[0] != '(') throw IoError(path.string() + ": malformed NPY shape");
  const auto close = rest.find(')');
  if (close == std::string::npos) throw IoError(path.string() + ": malformed NPY shape");
  std::vector<std::size_t> shape;
  std::stringstream items(rest.substr(1, close - 1));
  std::string item;
  while (std::getline(items, item, ',')) {
    const auto first = item.find_first_not_of(" ");
    if (first == std::string::npos) continue;
    try {
      shape.push_back(static_cast<std::size_t>(std::stoull(item.substr(first))));
    } catch (const std::exception&) {
      throw IoError(path.string() + ": malformed NPY shape entry '" + item + "'");
    }
  }
  return shape;
}

template <typename T>
void widen(const std::vector<char>& raw, std::vector<double>& out) {
  const std::size_t n = raw.size() / sizeof(T);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    T v;
    std::memcpy(&v, raw.data() + i * sizeof(T), sizeof(T));
    out[i] = static_cast<double>(v);
  }
}

std::string extension_of(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext;
}

}  // namespace

std::string npy_header(NpyDtype dtype, std::span<const std::size_t> shape) {
  std::string dict = "{'descr': '" + descr_of(dtype) + "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) dict += ", ";
    dict += std::to_string(shape[i]);
  }
  if (shape.size() == 1) dict += ",";
  dict += "), }";
  // magic(6) + version(2) + length(2) + dict + '\n', padded to 64 bytes.
  const std::size_t unpadded = 10 + dict.size() + 1;
  const std::size_t padded = (unpadded + 63) / 64 * 64;
  dict.append(padded - unpadded, ' ');
  dict += '\n';

  std::string out(npy_magic, 6);
  out += '\x01';
  out += '\x00';
  const auto len = static_cast<std::uint16_t>(dict.size());
  out += static_cast<char>(len & 0xff);
  out += static_cast<char>(len >> 8);
  out += dict;
  return out;
}

NpyArray read_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  char pre[8];
  if (!in.read(pre, 8) || std::memcmp(pre, npy_magic, 6) != 0) {
    throw IoError(path.string() + ": not an NPY file");
  }
  const int major = static_cast<unsigned char>(pre[6]);
  std::size_t header_len = 0;
  if (major == 1) {
    unsigned char b[2];
    if (!in.read(reinterpret_cast<char*>(b), 2)) throw IoError(path.string() + ": truncated NPY");
    header_len = b[0] | (b[1] << 8);
  } else if (major == 2 || major == 3) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError(path.string() + ": truncated NPY");
    header_len = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::size_t>(b[3]) << 24);
  } else {
    throw IoError(path.string() + ": unsupported NPY version " + std::to_string(major));
  }
  std::string dict(header_len, '\0');
  if (!in.read(dict.data(), static_cast<std::streamsize>(header_len))) {
    throw IoError(path.string() + ": truncated NPY header");
  }

  NpyArray arr;
  const std::string descr_rest = quoted_value(dict, "descr", path);
  const auto q1 = descr_rest.find('\'');
  const auto q2 = descr_rest.find('\'', q1 + 1);
  if (q1 != 0 || q2 == std::string::npos) throw IoError(path.string() + ": malformed NPY descr");
  const std::string descr = descr_rest.substr(1, q2 - 1);
  if (descr == "<f4") arr.dtype = NpyDtype::float32;
  else if (descr == "<f8") arr.dtype = NpyDtype::float64;
  else if (descr == "|u1") arr.dtype = NpyDtype::uint8;
  else if (descr == "|b1") arr.dtype = NpyDtype::boolean;
  else if (descr == "<i4") arr.dtype = NpyDtype::int32;
  else if (descr == "<i8") arr.dtype = NpyDtype::int64;
  else throw IoError(path.string() + ": unsupported NPY dtype '" + descr + "'");

  if (quoted_value(dict, "fortran_order", path).rfind("False", 0) != 0) {
    throw IoError(path.string() + ": Fortran-ordered NPY arrays are not supported");
  }
  arr.shape = parse_shape(quoted_value(dict, "shape", path), path);

  std::size_t count = 1;
  for (const auto d : arr.shape) count *= d;
  std::vector<char> raw(count * item_size(arr.dtype));
  if (!in.read(raw.data(), static_cast<std::streamsize>(raw.size()))) {
    throw IoError(path.string() + ": NPY payload shorter than its shape");
  }
  switch (arr.dtype) {
    case NpyDtype::float32: widen<float>(raw, arr.data); break;
    case NpyDtype::float64: widen<double>(raw, arr.data); break;
    case NpyDtype::uint8:
    case NpyDtype::boolean: widen<std::uint8_t>(raw, arr.data); break;
    case NpyDtype::int32: widen<std::int32_t>(raw, arr.data); break;
    case NpyDtype::int64: widen<std::int64_t>(raw, arr.data); break;
  }
  return arr;
}

void write_npy(const std::filesystem::path& path, std::span<const std::size_t> shape,
               std::span<const double> data, NpyDtype dtype) {
  if (dtype != NpyDtype::float32 && dtype != NpyDtype::float64) {
    throw ValidationError("write_npy: only float32 and float64 output is supported");
  }
  std::size_t count = 1;
  for (const auto d : shape) count *= d;
  if (count != data.size()) throw ValidationError("write_npy: shape does not match data size");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  const std::string header = npy_header(dtype, shape);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  if (dtype == NpyDtype::float64) {
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  } else {
    std::vector<float> narrow(data.begin(), data.end());
    out.write(reinterpret_cast<const char*>(narrow.data()),
              static_cast<std::streamsize>(narrow.size() * sizeof(float)));
  }
  if (!out) throw IoError(path.string() + ": write failed");
}

GuideTensor read_png_guide(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError(path.string() + ": " + image.message);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t channels = color ? 3 : 1;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError(path.string() + ": " + msg);
  }
  std::vector<double> values(buffer.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) values[i] = buffer[i] / 255.0;
  return GuideTensor(image.height, image.width, channels, std::move(values),
                     Normalization::divide_by_255);
}

void write_png8(const std::filesystem::path& path, std::size_t height, std::size_t width,
                std::size_t channels, std::span<const std::uint8_t> pixels) {
  if (channels != 1 && channels != 3) throw ValidationError("write_png8: channels must be 1 or 3");
  if (pixels.size() != height * width * channels) {
    throw ValidationError("write_png8: pixel buffer does not match dimensions");
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    throw IoError(path.string() + ": " + image.message);
  }
}

void write_pgm16(const std::filesystem::path& path, std::size_t height, std::size_t width,
                 std::span<const double> values) {
  if (values.size() != height * width) throw ValidationError("write_pgm16: size mismatch");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << "P5\n" << width << " " << height << "\n65535\n";
  std::vector<unsigned char> bytes(values.size() * 2);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::clamp(values[i], 0.0, 1.0);
    const auto s = static_cast<std::uint16_t>(std::lround(v * 65535.0));
    bytes[2 * i] = static_cast<unsigned char>(s >> 8);
    bytes[2 * i + 1] = static_cast<unsigned char>(s & 0xff);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

std::vector<std::uint16_t> read_pgm16(const std::filesystem::path& path, std::size_t& height,
                                      std::size_t& width) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::string magic;
  std::size_t maxval = 0;
  in >> magic >> width >> height >> maxval;
  if (!in || magic != "P5" || maxval != 65535) {
    throw IoError(path.string() + ": not a 16-bit binary PGM");
  }
  in.get();
  std::vector<unsigned char> bytes(width * height * 2);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()))) {
    throw IoError(path.string() + ": truncated PGM payload");
  }
  std::vector<std::uint16_t> samples(width * height);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = static_cast<std::uint16_t>((bytes[2 * i] << 8) | bytes[2 * i + 1]);
  }
  return samples;
}

GuideTensor load_guide(const std::filesystem::path& path) {
  const std::string ext = extension_of(path);
  if (ext == ".png") return read_png_guide(path);
  if (ext != ".npy") throw IoError(path.string() + ": guide must be .png or .npy");
  NpyArray arr = read_npy(path);
  if (arr.dtype != NpyDtype::float32 && arr.dtype != NpyDtype::float64) {
    throw ValidationError(path.string() + ": guide NPY must be float32 or float64");
  }
  if (arr.shape.size() == 2) {
    return GuideTensor(arr.shape[0], arr.shape[1], 1, std::move(arr.data));
  }
  if (arr.shape.size() == 3) {
    return GuideTensor(arr.shape[0], arr.shape[1], arr.shape[2], std::move(arr.data));
  }
  throw ValidationError(path.string() + ": guide NPY must be H x W or H x W x C");
}

DenseField load_field(const std::filesystem::path& path, NpyDtype* dtype) {
  NpyArray arr = read_npy(path);
  if (arr.dtype != NpyDtype::float32 && arr.dtype != NpyDtype::float64) {
    throw ValidationError(path.string() + ": field NPY must be float32 or float64");
  }
  if (dtype) *dtype = arr.dtype;
  try {
    if (arr.shape.size() == 2) return DenseField(1, arr.shape[0], arr.shape[1], std::move(arr.data));
    if (arr.shape.size() == 3) {
      return DenseField(arr.shape[0], arr.shape[1], arr.shape[2], std::move(arr.data));
    }
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  throw ValidationError(path.string() + ": field NPY must be K x H x W or H x W");
}

void save_field(const std::filesystem::path& path, const DenseField& field, NpyDtype dtype) {
  const std::size_t shape[] = {field.channels(), field.height(), field.width()};
  write_npy(path, shape, field.values(), dtype);
}

RegionMask load_mask(const std::filesystem::path& path) {
  const std::string ext = extension_of(path);
  if (ext == ".png") {
    const GuideTensor g = read_png_guide(path);
    std::vector<std::uint8_t> flags(g.pixels());
    for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = g.pixel(i)[0] != 0.0 ? 1 : 0;
    return RegionMask(g.height(), g.width(), std::move(flags));
  }
  const NpyArray arr = read_npy(path);
  if (arr.shape.size() != 2) throw ValidationError(path.string() + ": mask NPY must be H x W");
  std::vector<std::uint8_t> flags(arr.data.size());
  for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = arr.data[i] != 0.0 ? 1 : 0;
  return RegionMask(arr.shape[0], arr.shape[1], std::move(flags));
}

}  // namespace apro::io
