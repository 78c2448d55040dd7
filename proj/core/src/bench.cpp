#include "apro/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "apro/errors.hpp"
#include "apro/global_prop.hpp"
#include "apro/grid_graph.hpp"
#include "apro/oracle.hpp"

namespace apro::bench {

namespace {

template <typename F>
Timing time_runs(int warmup, int reps, F&& run) {
  for (int i = 0; i < warmup; ++i) run();
  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(reps));
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    run();
    const auto t1 = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return summarize(std::move(samples));
}

}  // namespace

std::optional<double> BenchPoint::speedup() const {
  if (!naive || fast.median_ms <= 0.0) return std::nullopt;
  return naive->median_ms / fast.median_ms;
}

Timing summarize(std::vector<double> samples_ms) {
  Timing t;
  if (samples_ms.empty()) return t;
  std::vector<double> sorted = samples_ms;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  t.median_ms = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(m);
  double var = 0.0;
  for (const double s : sorted) var += (s - mean) * (s - mean);
  t.stdev_ms = m > 1 ? std::sqrt(var / static_cast<double>(m - 1)) : 0.0;
  t.samples_ms = std::move(samples_ms);
  return t;
}

std::vector<BenchPoint> run_global_bench(const BenchOptions& options) {
  if (options.sides.empty()) throw ValidationError("bench: no sizes given");
  if (options.repetitions < 1 || options.warmup < 0 || options.naive_repetitions < 1 ||
      options.naive_warmup < 0) {
    throw ValidationError("bench: repetition counts must be positive");
  }
  if (options.guide_channels == 0 || options.field_channels == 0) {
    throw ValidationError("bench: channel counts must be positive");
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<BenchPoint> points;
  for (const std::size_t side : options.sides) {
    if (side == 0) throw ValidationError("bench: sizes must be positive");
    const std::size_t n = side * side;
    std::vector<double> pixels(n * options.guide_channels);
    for (auto& v : pixels) v = byte(rng) / 255.0;
    const GuideTensor guide(side, side, options.guide_channels, std::move(pixels),
                            Normalization::divide_by_255);
    std::vector<double> scores(n * options.field_channels);
    for (auto& v : scores) v = unit(rng);
    const DenseField phi(options.field_channels, side, side, std::move(scores));
    const SpanningTree tree = guide_spanning_tree(guide);

    BenchPoint point;
    point.n = n;
    volatile double sink = 0.0;
    point.fast = time_runs(options.warmup, options.repetitions, [&] {
      sink = sink + global_propagate(tree, phi, options.zeta_g).values()[0];
    });
    if (n <= options.naive_max_pixels) {
      point.naive = time_runs(options.naive_warmup, options.naive_repetitions, [&] {
        sink = sink + oracle::gp_bruteforce(tree, phi, options.zeta_g).values()[0];
      });
    }
    points.push_back(std::move(point));
  }
  return points;
}

double loglog_slope(std::span<const BenchPoint> points) {
  if (points.size() < 2) throw ValidationError("loglog_slope: need at least two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    const double x = std::log(static_cast<double>(p.n));
    const double y = std::log(p.fast.median_ms);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(points.size());
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) throw ValidationError("loglog_slope: sizes must differ");
  return (m * sxy - sx * sy) / denom;
}

}  // namespace apro::bench
