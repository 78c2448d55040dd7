// apro: file-based front end for global/local affinity propagation.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "apro/bench.hpp"
#include "apro/config.hpp"
#include "apro/errors.hpp"
#include "apro/global_prop.hpp"
#include "apro/grid_graph.hpp"
#include "apro/io.hpp"
#include "apro/labeler.hpp"
#include "apro/local_prop.hpp"
#include "apro/version.hpp"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_io = 3;
constexpr int exit_validation = 4;

struct PropagateArgs {
  std::string image;
  std::string feature;
  std::string feature_norm = "minmax";
  std::string unary;
  std::string mode = "parallel";
  double zeta_g = 0.07;
  double zeta_s = 0.15;
  int radius = 2;
  int iters = 20;
  std::string out_prefix;
  std::string format = "npy";
};

struct AffinityArgs {
  std::string image;
  std::string pixel;
  double zeta_g = 0.07;
  double zeta_s = 0.15;
  int radius = 2;
  bool local = false;
  std::string out_prefix;
  std::string format = "pgm";
};

struct LossArgs {
  std::string pred;
  std::string label_g;
  std::string label_s;
  std::string mask;
};

struct BenchArgs {
  std::vector<std::size_t> sizes{64, 128, 256, 512, 1024};
  int warmup = 5;
  int reps = 20;
  std::size_t naive_max_side = 128;
  int naive_reps = 3;
  std::size_t channels = 1;
  double zeta_g = 0.07;
  std::uint64_t seed = 7;
  std::string out;
};

fs::path with_suffix(const std::string& prefix, const std::string& suffix) {
  return fs::path(prefix + suffix);
}

void write_previews(const std::string& prefix, const std::string& tag, const apro::DenseField& f) {
  for (std::size_t k = 0; k < f.channels(); ++k) {
    apro::io::write_pgm16(with_suffix(prefix, tag + "_c" + std::to_string(k) + ".pgm"), f.height(),
                          f.width(), f.plane(k));
  }
}

void write_output(const PropagateArgs& args, const std::string& tag, const apro::DenseField& f,
                  apro::io::NpyDtype dtype) {
  if (args.format == "pgm") {
    write_previews(args.out_prefix, tag, f);
  } else {
    apro::io::save_field(with_suffix(args.out_prefix, tag + ".npy"), f, dtype);
  }
}

int run_propagate(const PropagateArgs& args) {
  const auto mode = apro::parse_combine_mode(args.mode);
  if (!mode) throw apro::ValidationError("unknown --mode '" + args.mode + "'");

  apro::PropagationConfig config;
  config.zeta_g = args.zeta_g;
  config.zeta_s = args.zeta_s;
  config.lp_radius = args.radius;
  config.lp_iterations = args.iters;
  config.combine_mode = *mode;
  config.validate();

  const apro::GuideTensor guide = apro::io::load_guide(args.image);
  std::optional<apro::GuideTensor> feature;
  if (!args.feature.empty()) {
    feature = apro::io::load_guide(args.feature);
    if (args.feature_norm == "minmax") feature = apro::normalize_min_max(*feature);
    if (feature->height() != guide.height() || feature->width() != guide.width()) {
      throw apro::ValidationError(args.feature + ": feature is " +
                                  std::to_string(feature->height()) + "x" +
                                  std::to_string(feature->width()) + " but " + args.image +
                                  " is " + std::to_string(guide.height()) + "x" +
                                  std::to_string(guide.width()));
    }
  }
  apro::io::NpyDtype dtype{};
  const apro::DenseField phi = apro::io::load_field(args.unary, &dtype);
  if (phi.height() != guide.height() || phi.width() != guide.width()) {
    throw apro::ValidationError(args.unary + ": unary is " + std::to_string(phi.height()) + "x" +
                                std::to_string(phi.width()) + " but " + args.image + " is " +
                                std::to_string(guide.height()) + "x" +
                                std::to_string(guide.width()));
  }

  const auto t0 = std::chrono::steady_clock::now();
  const apro::SoftLabelPair labels = apro::generate_pseudo_labels(guide, feature, phi, config);
  const auto t1 = std::chrono::steady_clock::now();

  if (labels.identical) {
    write_output(args, "", labels.y_global, dtype);
  } else {
    write_output(args, "_g", labels.y_global, dtype);
    write_output(args, "_s", labels.y_local, dtype);
  }

  std::printf("propagate: %zux%zu C=%zu K=%zu mode=%s zeta_g=%g zeta_s=%g radius=%d iters=%d "
              "time_ms=%.3f\n",
              guide.height(), guide.width(), guide.channels(), phi.channels(),
              std::string(apro::to_string(*mode)).c_str(), config.zeta_g, config.zeta_s,
              config.lp_radius, config.lp_iterations,
              std::chrono::duration<double, std::milli>(t1 - t0).count());
  return exit_ok;
}

apro::NodeId parse_pixel(const std::string& text, const apro::GuideTensor& guide) {
  std::size_t x = 0, y = 0;
  char comma = 0;
  std::istringstream in(text);
  if (!(in >> x >> comma >> y) || comma != ',' || !(in >> std::ws).eof()) {
    throw apro::ValidationError("--pixel expects x,y but got '" + text + "'");
  }
  if (x >= guide.width() || y >= guide.height()) {
    throw apro::ValidationError("--pixel " + text + " is outside the " +
                                std::to_string(guide.width()) + "x" +
                                std::to_string(guide.height()) + " image (width x height)");
  }
  return static_cast<apro::NodeId>(y * guide.width() + x);
}

void write_map(const AffinityArgs& args, const std::string& tag, const apro::DenseField& map) {
  apro::io::save_field(with_suffix(args.out_prefix, tag + ".npy"), map,
                       apro::io::NpyDtype::float64);
  if (args.format == "pgm") {
    apro::io::write_pgm16(with_suffix(args.out_prefix, tag + ".pgm"), map.height(), map.width(),
                          map.plane(0));
  }
}

int run_affinity_map(const AffinityArgs& args) {
  const apro::GuideTensor guide = apro::io::load_guide(args.image);
  const apro::NodeId query = parse_pixel(args.pixel, guide);
  const apro::SpanningTree tree = apro::guide_spanning_tree(guide);
  write_map(args, "", apro::global_affinity_map(tree, query, args.zeta_g));
  if (args.local) {
    write_map(args, "_local", apro::local_kernel_window(guide, query, args.zeta_s, args.radius));
  }
  std::printf("affinity-map: %zux%zu pixel=%s zeta_g=%g%s\n", guide.height(), guide.width(),
              args.pixel.c_str(), args.zeta_g, args.local ? " local=1" : "");
  return exit_ok;
}

int run_loss(const LossArgs& args) {
  const apro::DenseField pred = apro::io::load_field(args.pred);
  apro::SoftLabelPair labels;
  labels.y_global = apro::io::load_field(args.label_g);
  if (args.label_s.empty()) {
    labels.y_local = labels.y_global;
    labels.identical = true;
    labels.mode = apro::CombineMode::gp_then_lp;
  } else {
    labels.y_local = apro::io::load_field(args.label_s);
  }
  const apro::RegionMask mask = args.mask.empty()
                                    ? apro::RegionMask(pred.height(), pred.width())
                                    : apro::io::load_mask(args.mask);
  if (mask.height() != pred.height() || mask.width() != pred.width()) {
    throw apro::ValidationError(args.mask + ": mask is " + std::to_string(mask.height()) + "x" +
                                std::to_string(mask.width()) + " but " + args.pred + " is " +
                                std::to_string(pred.height()) + "x" + std::to_string(pred.width()));
  }
  std::printf("%.17g\n", apro::affinity_loss(pred, labels, mask));
  return exit_ok;
}

int run_bench(const BenchArgs& args) {
  apro::bench::BenchOptions options;
  options.sides = args.sizes;
  options.warmup = args.warmup;
  options.repetitions = args.reps;
  options.naive_max_pixels = args.naive_max_side * args.naive_max_side;
  options.naive_repetitions = args.naive_reps;
  options.field_channels = args.channels;
  options.zeta_g = args.zeta_g;
  options.seed = args.seed;

  std::ofstream file;
  if (!args.out.empty()) {
    file.open(args.out, std::ios::trunc);
    if (!file) throw apro::IoError(args.out + ": cannot open for writing");
  }
  std::ostream& out = args.out.empty() ? std::cout : file;

  const auto points = apro::bench::run_global_bench(options);
  for (const auto& p : points) {
    nlohmann::json line;
    line["n"] = p.n;
    line["fast_ms"] = p.fast.median_ms;
    line["naive_ms"] = p.naive ? nlohmann::json(p.naive->median_ms) : nlohmann::json(nullptr);
    const auto speedup = p.speedup();
    line["speedup"] = speedup ? nlohmann::json(*speedup) : nlohmann::json(nullptr);
    line["fast_stdev_ms"] = p.fast.stdev_ms;
    line["naive_stdev_ms"] = p.naive ? nlohmann::json(p.naive->stdev_ms) : nlohmann::json(nullptr);
    out << line.dump() << "\n";
  }
  nlohmann::json last;
  last["slope"] = points.size() >= 2 ? nlohmann::json(apro::bench::loglog_slope(points))
                                      : nlohmann::json(nullptr);
  out << last.dump() << std::endl;
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Global and local affinity propagation for soft pseudo labels", "apro"};
  app.set_version_flag("--version", std::string(apro::version_string));
  app.require_subcommand(1);

  const auto modes = CLI::IsMember({"parallel", "gp-lp", "lp-gp"});

  PropagateArgs prop;
  auto* propagate = app.add_subcommand("propagate", "Propagate a unary field into soft labels");
  propagate->add_option("--image", prop.image, "Guide image (.png or .npy)")->required();
  propagate->add_option("--feature", prop.feature, "Optional feature guide (.npy or .png)");
  propagate->add_option("--feature-norm", prop.feature_norm, "Feature normalisation")
      ->check(CLI::IsMember({"none", "minmax"}))
      ->capture_default_str();
  propagate->add_option("--unary", prop.unary, "Unary field, K x H x W .npy")->required();
  propagate->add_option("--mode", prop.mode, "parallel | gp-lp | lp-gp")
      ->check(modes)
      ->capture_default_str();
  propagate->add_option("--zeta-g", prop.zeta_g)->capture_default_str();
  propagate->add_option("--zeta-s", prop.zeta_s)->capture_default_str();
  propagate->add_option("--radius", prop.radius)->capture_default_str();
  propagate->add_option("--iters", prop.iters)->capture_default_str();
  propagate->add_option("--out-prefix", prop.out_prefix)->required();
  propagate->add_option("--format", prop.format, "npy fields or pgm previews")
      ->check(CLI::IsMember({"npy", "pgm"}))
      ->capture_default_str();

  AffinityArgs aff;
  auto* affinity = app.add_subcommand("affinity-map", "Render the global affinity of one pixel");
  affinity->add_option("--image", aff.image, "Guide image (.png or .npy)")->required();
  affinity->add_option("--pixel", aff.pixel, "Query pixel as x,y")->required();
  affinity->add_option("--zeta-g", aff.zeta_g)->capture_default_str();
  affinity->add_flag("--local", aff.local, "Also write the local kernel window");
  affinity->add_option("--zeta-s", aff.zeta_s)->capture_default_str();
  affinity->add_option("--radius", aff.radius)->capture_default_str();
  affinity->add_option("--out-prefix", aff.out_prefix)->required();
  affinity->add_option("--format", aff.format, "pgm (PGM + NPY) or npy only")
      ->check(CLI::IsMember({"npy", "pgm"}))
      ->capture_default_str();

  LossArgs loss_args;
  auto* loss = app.add_subcommand("loss", "Masked L1 affinity loss");
  loss->add_option("--pred", loss_args.pred, "Prediction field .npy")->required();
  loss->add_option("--label-g", loss_args.label_g, "Global (or cascaded) label .npy")->required();
  loss->add_option("--label-s", loss_args.label_s, "Local label .npy (parallel mode)");
  loss->add_option("--mask", loss_args.mask, "H x W mask, nonzero = unlabeled pixel");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Time fast vs brute-force global propagation");
  bench->add_option("--sizes", bench_args.sizes, "Square side lengths")
      ->delimiter(',')
      ->capture_default_str();
  bench->add_option("--warmup", bench_args.warmup)->capture_default_str();
  bench->add_option("--reps", bench_args.reps)->capture_default_str();
  bench->add_option("--naive-max-side", bench_args.naive_max_side,
                    "Largest side timed with the brute-force oracle")
      ->capture_default_str();
  bench->add_option("--naive-reps", bench_args.naive_reps)->capture_default_str();
  bench->add_option("--channels", bench_args.channels, "Unary channels K")->capture_default_str();
  bench->add_option("--zeta-g", bench_args.zeta_g)->capture_default_str();
  bench->add_option("--seed", bench_args.seed)->capture_default_str();
  bench->add_option("--out", bench_args.out, "Write the JSON-lines report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*propagate) return run_propagate(prop);
    if (*affinity) return run_affinity_map(aff);
    if (*loss) return run_loss(loss_args);
    if (*bench) return run_bench(bench_args);
  } catch (const apro::IoError& e) {
    std::cerr << "apro: " << e.what() << "\n";
    return exit_io;
  } catch (const apro::ValidationError& e) {
    std::cerr << "apro: " << e.what() << "\n";
    return exit_validation;
  }
  return exit_usage;
}
