#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "packbound/cli.hpp"

namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("packbound_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string(PACKBOUND_CLI_PATH) + " " + args + " --out " + out.string() + " > " +
                          (out / "stdout.txt").string() + " 2> " + (out / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using Table = std::vector<std::map<std::string, std::string>>;

Table read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  Table rows;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::map<std::string, std::string> row;
    for (const std::string& h : header) {
      if (!std::getline(ss, cell, ',')) cell.clear();
      row[h] = cell;
    }
    rows.push_back(row);
  }
  return rows;
}

double num(const std::string& s) { return std::stod(s); }

std::string key_value(const fs::path& p, const std::string& key) {
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  }
  return {};
}

std::string data(const std::string& name) { return std::string(PACKBOUND_DATA_DIR) + "/" + name; }

}  // namespace

TEST(CliSpectrum, UnitSquare) {
  const fs::path out = scratch("spectrum_square");
  ASSERT_EQ(run("spectrum --domain builtin:square --k 10 --h 1/64,1/128", out), 0);
  const Table t = read_csv(out / "spectrum.csv");
  ASSERT_EQ(t.size(), 10u);
  EXPECT_NEAR(num(t[0].at("eigenvalue")), 2 * kPi * kPi, 1e-3 * 2 * kPi * kPi);
  EXPECT_EQ(t[0].at("index"), "1");
}

TEST(CliSpectrum, UnitDisc) {
  const fs::path out = scratch("spectrum_disc");
  ASSERT_EQ(run("spectrum --domain builtin:disc --k 1", out), 0);
  const double j0 = oracle::bessel_j0_first_zero();
  EXPECT_NEAR(num(read_csv(out / "spectrum.csv")[0].at("eigenvalue")), j0 * j0, 0.01 * j0 * j0);
}

TEST(CliSpectrum, PolygonFileIsReoriented) {
  const fs::path out = scratch("spectrum_house");
  ASSERT_EQ(run("spectrum --domain " + data("house_cw.json") + " --k 3 --h 1/32,1/64", out), 0);
  EXPECT_EQ(read_csv(out / "spectrum.csv").size(), 3u);
}

TEST(CliErrors, ConfigurationErrorsExitWithTwo) {
  const fs::path out = scratch("errors");
  EXPECT_EQ(run("spectrum --k 0", out), 2);
  EXPECT_EQ(run("verify --delta 1.5", out), 2);
  EXPECT_EQ(run("verify --delta nonsense", out), 2);
  EXPECT_EQ(run("verify --delta catalog:nothing", out), 2);
  EXPECT_EQ(run("spectrum --domain builtin:blob", out), 2);
  EXPECT_EQ(run("spectrum --domain " + data("nonconvex.json"), out), 2);
  EXPECT_EQ(run("spectrum --domain " + data("missing.json"), out), 2);
  EXPECT_EQ(run("spectrum --h 1/128,1/64", out), 2);
  EXPECT_EQ(run("spectrum --h abc", out), 2);
  EXPECT_EQ(run("spectrum --h 1/2", out), 2);  // coarser than diameter / 8
  EXPECT_EQ(run("packing --domain builtin:disc", out), 2);
  EXPECT_EQ(run("packing --sigma 0.5", out), 2);
  EXPECT_EQ(run("--bogus", out), 2);
  EXPECT_EQ(run("", out), 2);
  EXPECT_FALSE(slurp(out / "stderr.txt").empty());
}

TEST(CliPacking, SquareTriangleAndRandomHexagon) {
  {
    const fs::path out = scratch("packing_square");
    ASSERT_EQ(run("packing --domain builtin:square --sigma 10", out), 0);
    EXPECT_GE(num(key_value(out / "packing.txt", "density")), 0.999);
    EXPECT_EQ(key_value(out / "packing.txt", "valid"), "true");
    const std::string svg = slurp(out / "packing.svg");
    std::size_t paths = 0;
    for (auto pos = svg.find("<path"); pos != std::string::npos; pos = svg.find("<path", pos + 1)) ++paths;
    EXPECT_EQ(paths, 81u);
    const Table w = read_csv(out / "windows.csv");
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].at("N"), "81");
  }
  {
    const fs::path out = scratch("packing_triangle");
    ASSERT_EQ(run("packing --domain " + data("right_triangle.json"), out), 0);
    EXPECT_GE(num(key_value(out / "packing.txt", "density")), 0.999);
    EXPECT_EQ(read_csv(out / "windows.csv").size(), 3u);
  }
  {
    const fs::path out = scratch("packing_hexagon");
    ASSERT_EQ(run("packing --domain builtin:random:6:7", out), 0);
    EXPECT_GE(num(key_value(out / "packing.txt", "density")), std::sqrt(3.0) / 2.0 - 1e-6);
    EXPECT_EQ(key_value(out / "packing.txt", "lemma_check"), "pass");
  }
}

TEST(CliBounds, ConvexFloorRow) {
  const fs::path out = scratch("bounds");
  ASSERT_EQ(run("bounds --n 2 --volume 1 --delta 0.8660254037844386 --k 5", out), 0);
  const Table t = read_csv(out / "bounds.csv");
  ASSERT_EQ(t.size(), 5u);
  EXPECT_NEAR(num(t[0].at("polya")), 12.566, 1e-3);
  EXPECT_NEAR(num(t[0].at("li_yau")), 6.283, 1e-3);
  EXPECT_NEAR(num(t[0].at("theorem1")), 10.883, 1e-3);
  EXPECT_NEAR(num(t[0].at("corollary3")), 10.883, 1e-3);
  EXPECT_EQ(t[0].at("computed_lambda"), "");

  const fs::path tiling = scratch("bounds_tiling");
  ASSERT_EQ(run("bounds --n 2 --delta 1 --k 3", tiling), 0);
  for (const auto& row : read_csv(tiling / "bounds.csv")) EXPECT_EQ(row.at("theorem1"), row.at("polya"));

  const fs::path ball = scratch("bounds_ball");
  ASSERT_EQ(run("bounds --n 3 --delta catalog:unit-ball-3d --k 1", ball), 0);
  const Table b = read_csv(ball / "bounds.csv");
  EXPECT_GT(num(b[0].at("theorem1")) / num(b[0].at("li_yau")), 1.0);
  EXPECT_EQ(b[0].at("corollary3"), "");
}

TEST(CliVerify, UnitSquareWithOptimizedDelta) {
  const fs::path out = scratch("verify_square");
  ASSERT_EQ(run("verify --domain builtin:square --k 20", out), 0);
  const Table t = read_csv(out / "verify.csv");
  ASSERT_EQ(t.size(), 20u);
  const double delta = num(key_value(out / "verify.txt", "delta"));
  EXPECT_GE(delta, 0.999);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(t[i].at("theorem1_pass"), "1");
    EXPECT_EQ(t[i].at("corollary3_pass"), "1");
    EXPECT_NEAR(num(t[i].at("theorem1")), 4 * kPi * (i + 1) * delta, 1e-9 * (i + 1));
  }
  EXPECT_EQ(key_value(out / "verify.txt", "result"), "pass");
  EXPECT_FALSE(read_csv(out / "bounds.csv").front().at("computed_lambda").empty());
}

TEST(CliVerify, UnitDiscWithHexagonalDelta) {
  const fs::path out = scratch("verify_disc");
  ASSERT_EQ(run("verify --domain builtin:disc --delta 0.90689968211710892 --k 10", out), 0);
  const Table t = read_csv(out / "verify.csv");
  ASSERT_EQ(t.size(), 10u);
  EXPECT_NEAR(num(t[0].at("computed_lambda")), 5.783, 0.06);
  EXPECT_NEAR(num(t[0].at("theorem1")), 3.628, 1e-3);
  for (const auto& row : t) EXPECT_EQ(row.at("theorem1_pass"), "1");
}

TEST(CliVerify, SaturatedCoarseSpectrumFails) {
  // An 8x8 node grid has eigenvalues below 8/h^2 = 648, under the tiling bound 4 pi k for k = 60.
  const fs::path out = scratch("verify_fail");
  EXPECT_EQ(run("verify --domain builtin:square --h 1/9 --k 60 --delta 1", out), 4);
  EXPECT_NE(slurp(out / "stderr.txt").find("60"), std::string::npos);
  EXPECT_EQ(key_value(out / "verify.txt", "result"), "fail");
}

TEST(CliReport, ConcatenatesOutputs) {
  const fs::path out = scratch("report");
  EXPECT_EQ(run("report", out), 2);
  ASSERT_EQ(run("spectrum --domain builtin:square --k 3 --h 1/32,1/64", out), 0);
  ASSERT_EQ(run("bounds --k 3 --delta 1", out), 0);
  ASSERT_EQ(run("report", out), 0);
  const std::string md = slurp(out / "report.md");
  EXPECT_NE(md.find("## spectrum.csv"), std::string::npos);
  EXPECT_NE(md.find("## bounds.csv"), std::string::npos);
  EXPECT_EQ(md.find("## verify.csv"), std::string::npos);
}

TEST(CliDeterminism, RepeatedRunsAreByteIdentical) {
  const std::vector<std::string> commands{
      "spectrum --domain builtin:random:7:3 --k 6 --h 1/32,1/64 --seed 4",
      "packing --domain builtin:random:5:2 --seed 9 --restarts 8",
      "verify --domain builtin:triangle --k 5 --h 1/32,1/64 --seed 2 --restarts 8",
  };
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const fs::path a = scratch("det_a" + std::to_string(i));
    const fs::path b = scratch("det_b" + std::to_string(i));
    ASSERT_EQ(run(commands[i], a), 0) << commands[i];
    ASSERT_EQ(run(commands[i], b), 0) << commands[i];
    for (const auto& entry : fs::directory_iterator(a)) {
      const std::string name = entry.path().filename().string();
      if (entry.path().extension() != ".csv" && entry.path().extension() != ".svg") continue;
      EXPECT_EQ(slurp(a / name), slurp(b / name)) << commands[i] << " " << name;
    }
  }
}

TEST(CliLibrary, ParseHelpers) {
  using namespace packbound::cli;
  EXPECT_EQ(parse_list("1/64,1/128"), (std::vector<double>{1.0 / 64, 1.0 / 128}));
  EXPECT_EQ(parse_list("10,20.5"), (std::vector<double>{10.0, 20.5}));
  EXPECT_THROW(parse_list("1/0"), packbound::InvalidInput);
  EXPECT_THROW(parse_list(""), packbound::InvalidInput);
  EXPECT_EQ(parse_domain("builtin:regular:6").polygon->size(), 6u);
  EXPECT_FALSE(parse_domain("builtin:disc").polygon.has_value());
  EXPECT_THROW(parse_domain("builtin:regular:2"), packbound::InvalidInput);
  EXPECT_THROW(parse_domain("builtin:random:5"), packbound::InvalidInput);
  EXPECT_EQ(parse_domain(data("house_cw.json")).label, "house (clockwise input)");

  ExperimentConfig cfg;
  cfg.delta = "catalog:disc-2d";
  EXPECT_DOUBLE_EQ(resolve_delta(cfg, nullptr).value, kPi / std::sqrt(12.0));
  cfg.delta = "optimize";
  EXPECT_THROW(resolve_delta(cfg, nullptr), packbound::InvalidInput);
  cfg.delta = "0";
  EXPECT_THROW(resolve_delta(cfg, nullptr), packbound::InvalidInput);
}
