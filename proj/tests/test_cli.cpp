#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "apro/io.hpp"
#include "json.hpp"
#include "support/cli_runner.hpp"
#include "support/generators.hpp"
#include "support/temp_dir.hpp"

namespace apro {
namespace {

using testing::file_bytes;
using testing::quote;
using testing::run_command;

const std::filesystem::path cli = APRO_CLI_PATH;
const std::filesystem::path golden = APRO_GOLDEN_DIR;

class Cli : public ::testing::Test {
 protected:
  testing::CommandResult apro(const std::string& args) {
    return run_command(quote(cli) + " " + args, dir / "log.txt");
  }
  std::string in(const std::string& name) const { return quote(golden / name); }
  std::string out(const std::string& name) const { return quote(dir / name); }

  testing::TempDir dir;
};

TEST_F(Cli, GoldensAreReproducedByOracle) {
  testing::TempDir fresh;
  const auto r = run_command(quote(APRO_MAKE_GOLDENS_PATH) + " " + quote(fresh.path()),
                             fresh / "log.txt");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  for (const auto& entry : std::filesystem::directory_iterator(golden)) {
    const auto name = entry.path().filename();
    ASSERT_TRUE(std::filesystem::exists(fresh / name.string())) << name;
    EXPECT_EQ(file_bytes(entry.path()), file_bytes(fresh / name.string())) << name;
  }
}

TEST_F(Cli, PropagateParallelMatchesGoldens) {
  auto r = apro("propagate --image " + in("gp_2x2_guide.npy") + " --unary " +
                in("gp_2x2_unary.npy") + " --mode parallel --zeta-g 0.5 --out-prefix " +
                out("y"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("propagate: 2x2"), std::string::npos);
  EXPECT_NE(r.output.find("mode=parallel"), std::string::npos);
  EXPECT_EQ(file_bytes(dir / "y_g.npy"), file_bytes(golden / "gp_2x2_y_g.npy"));
  EXPECT_TRUE(std::filesystem::exists(dir / "y_s.npy"));

  r = apro("propagate --image " + in("lp_1x3_guide.npy") + " --unary " + in("lp_1x3_unary.npy") +
           " --zeta-s 1 --radius 1 --iters 1 --out-prefix " + out("l"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(file_bytes(dir / "l_s.npy"), file_bytes(golden / "lp_1x3_y_s.npy"));
}

TEST_F(Cli, AffinityMapMatchesGoldens) {
  const auto r = apro("affinity-map --image " + in("two_region.png") +
                      " --pixel 1,1 --zeta-g 1 --out-prefix " + out("map"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(file_bytes(dir / "map.pgm"), file_bytes(golden / "two_region_map.pgm"));
  EXPECT_EQ(file_bytes(dir / "map.npy"), file_bytes(golden / "two_region_map.npy"));
  std::size_t h = 0, w = 0;
  const auto px = io::read_pgm16(dir / "map.pgm", h, w);
  EXPECT_EQ(px[1 * 6 + 1], 65535);
  EXPECT_EQ(px[5], static_cast<std::uint16_t>(std::lround(std::exp(-1.0) * 65535.0)));
}

TEST_F(Cli, AffinityMapUniformImageIsWhiteAndLocalWindow) {
  io::write_png8(dir / "flat.png", 3, 3, 1, std::vector<std::uint8_t>(9, 90));
  const auto r = apro("affinity-map --image " + out("flat.png") +
                      " --pixel 0,0 --local --radius 1 --out-prefix " + out("m"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  std::size_t h = 0, w = 0;
  for (const auto v : io::read_pgm16(dir / "m.pgm", h, w)) EXPECT_EQ(v, 65535);
  const auto local = io::read_pgm16(dir / "m_local.pgm", h, w);
  EXPECT_EQ(local, (std::vector<std::uint16_t>{65535, 65535, 0, 65535, 65535, 0, 0, 0, 0}));
}

TEST_F(Cli, ConstantUnaryGivesConstantOutputsInEveryMode) {
  std::mt19937_64 rng(501);
  std::vector<std::uint8_t> rgb(5 * 4 * 3);
  for (auto& v : rgb) v = static_cast<std::uint8_t>(rng());
  io::write_png8(dir / "rgb.png", 5, 4, 3, rgb);
  io::save_field(dir / "c.npy", testing::constant_field(2, 5, 4, 0.3), io::NpyDtype::float64);
  for (const std::string mode : {"parallel", "gp-lp", "lp-gp"}) {
    const auto r = apro("propagate --image " + out("rgb.png") + " --unary " + out("c.npy") +
                        " --mode " + mode + " --out-prefix " + out(mode));
    ASSERT_EQ(r.exit_code, 0) << r.output;
    const std::vector<std::string> files =
        mode == "parallel" ? std::vector<std::string>{mode + "_g.npy", mode + "_s.npy"}
                           : std::vector<std::string>{mode + ".npy"};
    for (const auto& f : files) {
      const DenseField y = io::load_field(dir / f);
      EXPECT_EQ(y.channels(), 2u);
      for (const double v : y.values()) EXPECT_NEAR(v, 0.3, 1e-12) << f;
    }
  }
}

TEST_F(Cli, IntegerUnaryIsRejected) {
  const std::size_t shape[] = {2, 2};
  io::write_npy(dir / "g.npy", shape, std::vector<double>{0, 0.5, 0, 1}, io::NpyDtype::float64);
  std::ofstream(dir / "u.npy", std::ios::binary)
      << io::npy_header(io::NpyDtype::uint8, shape) << std::string("\x01\x00\x00\x00", 4);
  const auto r = apro("propagate --image " + out("g.npy") + " --unary " + out("u.npy") +
                      " --out-prefix " + out("y"));
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_NE(r.output.find("float32 or float64"), std::string::npos);
}

TEST_F(Cli, OutputsAreDeterministic) {
  std::mt19937_64 rng(503);
  std::vector<std::uint8_t> rgb(9 * 7 * 3);
  for (auto& v : rgb) v = static_cast<std::uint8_t>(rng() % 4 * 60);
  io::write_png8(dir / "rgb.png", 9, 7, 3, rgb);
  io::save_field(dir / "u.npy", testing::random_field(rng, 3, 9, 7), io::NpyDtype::float32);
  const std::string args = "propagate --image " + out("rgb.png") + " --unary " + out("u.npy") +
                           " --iters 5 --out-prefix ";
  ASSERT_EQ(apro(args + out("a")).exit_code, 0);
  ASSERT_EQ(apro(args + out("b")).exit_code, 0);
  EXPECT_EQ(file_bytes(dir / "a_g.npy"), file_bytes(dir / "b_g.npy"));
  EXPECT_EQ(file_bytes(dir / "a_s.npy"), file_bytes(dir / "b_s.npy"));
}

TEST_F(Cli, FeatureGuideAndPgmPreviews) {
  std::mt19937_64 rng(505);
  io::write_png8(dir / "g.png", 4, 4, 1, std::vector<std::uint8_t>(16, 10));
  const std::size_t shape[] = {4, 4, 5};
  std::vector<double> feat(80);
  for (auto& v : feat) v = static_cast<double>(rng() % 1000) - 500.0;
  io::write_npy(dir / "feat.npy", shape, feat, io::NpyDtype::float32);
  io::save_field(dir / "u.npy", testing::random_field(rng, 1, 4, 4, 0.0, 1.0),
                 io::NpyDtype::float64);
  auto r = apro("propagate --image " + out("g.png") + " --feature " + out("feat.npy") +
                " --unary " + out("u.npy") + " --format pgm --out-prefix " + out("p"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(std::filesystem::exists(dir / "p_g_c0.pgm"));
  EXPECT_TRUE(std::filesystem::exists(dir / "p_s_c0.pgm"));
}

TEST_F(Cli, LossExamples) {
  auto r = apro("loss --pred " + in("loss_pred.npy") + " --label-g " + in("loss_label_g.npy") +
                " --label-s " + in("loss_label_s.npy") + " --mask " + in("loss_mask_all.npy"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(std::stod(r.output), 1.0);

  r = apro("loss --pred " + in("loss_pred.npy") + " --label-g " + in("loss_label_g.npy") +
           " --label-s " + in("loss_label_s.npy") + " --mask " + in("loss_mask_none.npy"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(std::stod(r.output), 0.0);

  r = apro("loss --pred " + in("loss_pred.npy") + " --label-g " + in("loss_pred.npy") +
           " --label-s " + in("loss_pred.npy"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(std::stod(r.output), 0.0);

  r = apro("loss --pred " + in("loss_pred.npy") + " --label-g " + in("gp_2x2_y_g.npy"));
  EXPECT_EQ(r.exit_code, 4) << r.output;
}

TEST_F(Cli, ErrorExitCodes) {
  auto r = apro("propagate --image " + out("nope.png") + " --unary " + in("gp_2x2_unary.npy") +
                " --out-prefix " + out("x"));
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.output.find("nope.png"), std::string::npos);

  r = apro("propagate --image " + in("lp_1x3_guide.npy") + " --unary " + in("gp_2x2_unary.npy") +
           " --out-prefix " + out("x"));
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_NE(r.output.find("gp_2x2_unary.npy"), std::string::npos);

  r = apro("propagate --image " + in("gp_2x2_guide.npy") + " --unary " + in("gp_2x2_unary.npy") +
           " --zeta-g -1 --out-prefix " + out("x"));
  EXPECT_EQ(r.exit_code, 4);

  r = apro("propagate --image a --unary b --mode sideways --out-prefix c");
  EXPECT_EQ(r.exit_code, 2);
  r = apro("frobnicate");
  EXPECT_EQ(r.exit_code, 2);
  r = apro("");
  EXPECT_EQ(r.exit_code, 2);

  r = apro("affinity-map --image " + in("two_region.png") + " --pixel 6,0 --out-prefix " +
           out("m"));
  EXPECT_EQ(r.exit_code, 4);
  r = apro("affinity-map --image " + in("two_region.png") + " --pixel 3 --out-prefix " + out("m"));
  EXPECT_EQ(r.exit_code, 4);

  EXPECT_EQ(apro("--help").exit_code, 0);
  EXPECT_EQ(apro("--version").exit_code, 0);
}

TEST_F(Cli, BenchReport) {
  const auto r = apro("bench --sizes 16,32 --warmup 1 --reps 3 --naive-max-side 16 --out " +
                      out("bench.jsonl"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  std::istringstream lines(file_bytes(dir / "bench.jsonl"));
  std::vector<nlohmann::json> rows;
  for (std::string line; std::getline(lines, line);) rows.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0]["n"], 256);
  EXPECT_GT(rows[0]["fast_ms"].get<double>(), 0.0);
  EXPECT_GT(rows[0]["naive_ms"].get<double>(), 0.0);
  EXPECT_GT(rows[0]["speedup"].get<double>(), 0.0);
  EXPECT_TRUE(rows[0].contains("fast_stdev_ms"));
  EXPECT_EQ(rows[1]["n"], 1024);
  EXPECT_TRUE(rows[1]["naive_ms"].is_null());
  EXPECT_TRUE(rows[2]["slope"].is_number());

  EXPECT_EQ(apro("bench --sizes 0").exit_code, 4);
}

}  // namespace
}  // namespace apro
