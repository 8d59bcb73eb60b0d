#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "srplan/cli.hpp"
#include "srplan/imaging.hpp"
#include "srplan/io.hpp"

using namespace srplan;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "srplan");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kData = SRPLAN_DATA_DIR;

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "srplan_cli_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("simulate the six patch scenario") {
  const auto r = invoke({"simulate", "--profile", kData + "/scenario6_profile.json", "--m1", "m1",
                      "--m2", "m2", "--thr", "5", "--tvs", "1,2,9,9,9,9"});
  REQUIRE(r.code == cli::kOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["makespan_ms"] == 40.0);
  CHECK(doc["assignments"][0]["engine"] == "GPU");
}

TEST_CASE("prune the three point fixture") {
  const auto r = invoke({"prune", "--catalog", kData + "/pareto3_catalog.json", "--profile",
                      kData + "/pareto3_profile.json", "--quality",
                      kData + "/pareto3_quality.json", "--format", "csv"});
  REQUIRE(r.code == cli::kOk);
  CHECK(r.out == "engine,model,psnr_db,latency_ms\nCPU,a,28,100\nCPU,c,29,150\n");
}

TEST_CASE("search with an inactive constraint") {
  const auto r = invoke({"search", "--catalog", kData + "/pareto3_catalog.json", "--profile",
                      kData + "/pareto3_profile.json", "--quality",
                      kData + "/pareto3_quality.json", "--eps-max", "inf"});
  REQUIRE(r.code == cli::kOk);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["best"]["feasible"] == true);
  CHECK(doc["best"]["m1"] == "a");
  CHECK(doc["best"]["latency_ms"] == 400.0);
}

TEST_CASE("search without a feasible design exits 4") {
  const auto r = invoke({"search", "--catalog", kData + "/nofeasible_catalog.json", "--profile",
                         kData + "/nofeasible_profile.json", "--quality",
                         kData + "/nofeasible_quality.json", "--eps-max", "1"});
  CHECK(r.code == cli::kNoFeasible);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["status"] == "no_feasible");
  CHECK(doc["best"]["feasible"] == false);
}

TEST_CASE("tv of constant and checkerboard images") {
  imaging::Image flat(40, 30, 1);
  for (auto& v : flat.pixels()) v = 9;
  const auto flat_path = scratch("flat.pgm");
  imaging::save_image(flat, flat_path);
  auto r = invoke({"tv", "--image", flat_path.string(), "--patch", "16x16", "--overlap", "4",
                "--format", "csv"});
  REQUIRE(r.code == cli::kOk);
  std::istringstream rows(r.out);
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) CHECK(line.substr(line.rfind(',') + 1) == "0");

  imaging::Image board(40, 30, 1);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) board.at(y, x) = (x + y) % 2 ? 255 : 0;
  const auto board_path = scratch("board.pgm");
  imaging::save_image(board, board_path);
  r = invoke({"tv", "--image", board_path.string(), "--patch", "16x16", "--overlap", "4"});
  REQUIRE(r.code == cli::kOk);
  const auto doc = nlohmann::json::parse(r.out);
  const auto parts = imaging::partition(board, {16, 16}, 4);
  REQUIRE(doc["patches"].size() == parts.patches.size());
  for (std::size_t i = 0; i < parts.patches.size(); ++i) {
    CHECK(doc["patches"][i]["tv"].get<double>() ==
          io::round_sig(oracle::brute_force_tv(parts.patches[i].pixels)));
    CHECK(doc["patches"][i]["tv"].get<double>() == 255.0 * (2 * 16 * 15));
  }
}

TEST_CASE("partition with upscaled stitch output") {
  const auto out = scratch("up.ppm");
  const auto r = invoke({"partition", "--image", kData + "/sample.ppm", "--scale", "2",
                      "--upscaler", "nearest", "--image-out", out.string()});
  REQUIRE(r.code == cli::kOk);
  const auto up = imaging::load_image(out);
  CHECK(up == imaging::upscale_reference(imaging::load_image(kData + "/sample.ppm"), 2,
                                         imaging::Upscaler::nearest));
}

TEST_CASE("exit codes") {
  CHECK(invoke({"tv", "--image", "/nonexistent.pgm"}).code == cli::kIoError);
  const auto missing = invoke({"tv", "--image", "/nonexistent.pgm"});
  CHECK(missing.err.find("/nonexistent.pgm") != std::string::npos);
  CHECK(invoke({"tv", "--bogus"}).code == cli::kBadFlags);
  CHECK(invoke({}).code == cli::kBadFlags);
  CHECK(invoke({"simulate", "--profile", kData + "/scenario6_profile.json", "--m1", "m1", "--m2",
             "m2", "--thr", "5", "--tvs", "1", "--quality", kData + "/pareto3_quality.json"})
            .code == cli::kBadFlags);
  CHECK(invoke({"simulate", "--profile", kData + "/scenario6_profile.json", "--m1", "m1", "--m2",
             "m2", "--thr", "abc", "--tvs", "1"})
            .code == cli::kBadFlags);
  CHECK(invoke({"search", "--catalog", kData + "/pareto3_catalog.json", "--profile",
             kData + "/pareto3_profile.json", "--quality", kData + "/pareto3_quality.json",
             "--eps-max", "-1"})
            .code == cli::kValidation);

  const auto bad = scratch("bad.json");
  io::write_file(bad, "{\"engines\": [");
  CHECK(invoke({"simulate", "--profile", bad.string(), "--m1", "m1", "--m2", "m2", "--thr", "1",
             "--tvs", "1"})
            .code == cli::kIoError);
  io::write_file(bad, R"({"engines": [], "engines": []})");
  CHECK(invoke({"simulate", "--profile", bad.string(), "--m1", "m1", "--m2", "m2", "--thr", "1",
             "--tvs", "1"})
            .code == cli::kValidation);
}

TEST_CASE("identical invocations give identical bytes") {
  const std::vector<std::string> args{
      "report",    "--series",  "eps",        "--catalog", kData + "/catalog.json",
      "--profile", kData + "/sdm845_patch_profile.json", "--quality",
      kData + "/sample_quality.json", "--threads", "3"};
  const auto a = invoke(args);
  const auto b = invoke(args);
  CHECK(a.code == cli::kOk);
  CHECK(a.out == b.out);
}
