#include "apro/local_prop.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "apro/errors.hpp"
#include "apro/grid_graph.hpp"

namespace apro {

namespace {

struct Offset {
  std::ptrdiff_t dy;
  std::ptrdiff_t dx;
};

// Half of the window: every unordered neighbour pair {i, i+o} appears once.
std::vector<Offset> forward_offsets(int radius) {
  std::vector<Offset> offsets;
  for (std::ptrdiff_t dy = 0; dy <= radius; ++dy) {
    for (std::ptrdiff_t dx = -radius; dx <= radius; ++dx) {
      if (dy == 0 && dx <= 0) continue;
      offsets.push_back({dy, dx});
    }
  }
  return offsets;
}

// Pixels (y, x) whose partner (y+dy, x+dx) is inside the image.
struct PairRange {
  std::size_t y_end;
  std::size_t x_begin;
  std::size_t x_end;
};

PairRange pair_range(const Offset& o, std::size_t h, std::size_t w) {
  const auto sh = static_cast<std::ptrdiff_t>(h);
  const auto sw = static_cast<std::ptrdiff_t>(w);
  PairRange r{};
  r.y_end = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, sh - o.dy));
  r.x_begin = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -o.dx));
  r.x_end = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, std::min(sw, sw - o.dx)));
  if (r.x_begin > r.x_end) r.x_begin = r.x_end;
  return r;
}

class LocalKernel {
 public:
  LocalKernel(const GuideTensor& guide, double zeta_s, int radius)
      : h_(guide.height()), w_(guide.width()), offsets_(forward_offsets(radius)),
        weights_(offsets_.size(), std::vector<double>(guide.pixels(), 0.0)),
        norm_(guide.pixels(), 1.0) {
    const double inv_zeta2 = 1.0 / (zeta_s * zeta_s);
    for (std::size_t k = 0; k < offsets_.size(); ++k) {
      const Offset& o = offsets_[k];
      const PairRange r = pair_range(o, h_, w_);
      const std::ptrdiff_t step = o.dy * static_cast<std::ptrdiff_t>(w_) + o.dx;
      auto& plane = weights_[k];
      for (std::size_t y = 0; y < r.y_end; ++y) {
        for (std::size_t x = r.x_begin; x < r.x_end; ++x) {
          const std::size_t i = y * w_ + x;
          const auto j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + step);
          const double wij =
              std::exp(-guide_distance(guide, static_cast<NodeId>(i), static_cast<NodeId>(j)) *
                       inv_zeta2);
          plane[i] = wij;
          norm_[i] += wij;
          norm_[j] += wij;
        }
      }
    }
  }

  // One Jacobi sweep: dst_i = (src_i + sum_j psi(i,j) src_j) / norm_i.
  void apply(std::span<const double> src, std::span<double> dst) const {
    std::copy(src.begin(), src.end(), dst.begin());
    for (std::size_t k = 0; k < offsets_.size(); ++k) {
      const Offset& o = offsets_[k];
      const PairRange r = pair_range(o, h_, w_);
      const std::ptrdiff_t step = o.dy * static_cast<std::ptrdiff_t>(w_) + o.dx;
      const auto& plane = weights_[k];
      for (std::size_t y = 0; y < r.y_end; ++y) {
        for (std::size_t x = r.x_begin; x < r.x_end; ++x) {
          const std::size_t i = y * w_ + x;
          const auto j = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(i) + step);
          dst[i] += plane[i] * src[j];
          dst[j] += plane[i] * src[i];
        }
      }
    }
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] /= norm_[i];
  }

 private:
  std::size_t h_;
  std::size_t w_;
  std::vector<Offset> offsets_;
  std::vector<std::vector<double>> weights_;
  std::vector<double> norm_;
};

void check_local_args(const GuideTensor& guide, double zeta_s, int radius, const char* what) {
  guide.validate();
  if (!(zeta_s > 0.0) || !std::isfinite(zeta_s)) {
    throw ValidationError(std::string(what) + ": zeta_s must be positive and finite");
  }
  if (radius < 1) throw ValidationError(std::string(what) + ": radius must be at least 1");
}

}  // namespace

DenseField local_propagate(const GuideTensor& guide, const DenseField& phi, double zeta_s,
                           int radius, int iterations) {
  check_local_args(guide, zeta_s, radius, "local_propagate");
  if (iterations < 1) throw ValidationError("local_propagate: iterations must be at least 1");
  phi.validate();
  require_aligned(guide, phi, "local_propagate");

  const LocalKernel kernel(guide, zeta_s, radius);
  DenseField out = phi;
  std::vector<double> scratch(phi.pixels());
  for (std::size_t c = 0; c < phi.channels(); ++c) {
    auto y = out.plane(c);
    for (int it = 0; it < iterations; ++it) {
      kernel.apply(y, scratch);
      std::copy(scratch.begin(), scratch.end(), y.begin());
    }
  }
  return out;
}

DenseField local_kernel_window(const GuideTensor& guide, NodeId query, double zeta_s, int radius) {
  check_local_args(guide, zeta_s, radius, "local_kernel_window");
  if (query >= guide.pixels()) throw ValidationError("local_kernel_window: query out of range");
  const auto h = static_cast<std::ptrdiff_t>(guide.height());
  const auto w = static_cast<std::ptrdiff_t>(guide.width());
  const std::ptrdiff_t qy = query / w;
  const std::ptrdiff_t qx = query % w;
  const double inv_zeta2 = 1.0 / (zeta_s * zeta_s);

  DenseField window(1, guide.height(), guide.width());
  for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(0, qy - radius);
       y <= std::min(h - 1, qy + radius); ++y) {
    for (std::ptrdiff_t x = std::max<std::ptrdiff_t>(0, qx - radius);
         x <= std::min(w - 1, qx + radius); ++x) {
      const auto j = static_cast<NodeId>(y * w + x);
      window.at(0, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) =
          std::exp(-guide_distance(guide, query, j) * inv_zeta2);
    }
  }
  return window;
}

}  // namespace apro
