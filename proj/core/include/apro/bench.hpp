#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace apro::bench {

struct BenchOptions {
  std::vector<std::size_t> sides{64, 128, 256, 512, 1024};
  int warmup = 5;
  int repetitions = 20;
  /// The quadratic oracle is only timed up to this many pixels.
  std::size_t naive_max_pixels = 128 * 128;
  int naive_warmup = 1;
  int naive_repetitions = 3;
  std::size_t guide_channels = 3;
  std::size_t field_channels = 1;
  double zeta_g = 0.07;
  std::uint64_t seed = 7;
};

struct Timing {
  double median_ms = 0.0;
  double stdev_ms = 0.0;
  std::vector<double> samples_ms;
};

struct BenchPoint {
  std::size_t n = 0;
  Timing fast;
  std::optional<Timing> naive;

  std::optional<double> speedup() const;
};

/// Times global_propagate against the brute-force oracle on random square
/// guides, one point per side length. The spanning tree is built outside the
/// timed region; both arms consume the same tree and field.
std::vector<BenchPoint> run_global_bench(const BenchOptions& options);

/// Least-squares slope of log(ms) against log(n).
double loglog_slope(std::span<const BenchPoint> points);

Timing summarize(std::vector<double> samples_ms);

}  // namespace apro::bench
