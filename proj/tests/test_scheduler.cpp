#include <limits>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "srplan/error.hpp"
#include "srplan/scheduler.hpp"

using namespace srplan;
using namespace srplan::scheduler;

namespace {

oracle::Instance six_patch() {
  oracle::Instance in;
  in.engines = {{"CPU", true, 40.0, std::nullopt},
                {"GPU", true, 30.0, std::nullopt},
                {"DSP", false, std::nullopt, 10.0}};
  in.tvs = {1, 2, 9, 9, 9, 9};
  in.thr = 5;
  return in;
}

ScheduleResult run(const oracle::Instance& in) {
  return schedule(oracle::tv_values(in.tvs), {"a", "b"}, tv::TvThreshold(in.thr),
                  oracle::to_profile(in));
}

}  // namespace

TEST_CASE("hand-stepped six patch scenario") {
  const auto r = run(six_patch());
  std::vector<std::string> where;
  for (const auto& a : r.assignments) where.push_back(a.engine_name);
  CHECK(where == std::vector<std::string>{"GPU", "CPU", "DSP", "DSP", "DSP", "DSP"});
  CHECK(r.t_end == std::vector<double>{40, 30, 40});
  CHECK(r.makespan_ms == 40);
  CHECK(r.model_choice() ==
        std::vector<ModelRole>{ModelRole::m1, ModelRole::m1, ModelRole::m2, ModelRole::m2,
                               ModelRole::m2, ModelRole::m2});
}

TEST_CASE("degenerate thresholds") {
  auto in = six_patch();
  in.thr = std::numeric_limits<double>::infinity();
  const auto easy = run(in);
  CHECK(easy.t_end[2] == 0.0);
  in.thr = 0;
  const auto hard = run(in);
  CHECK(hard.makespan_ms == oracle::load_balance(6, {40, 30, 10}, 0));
}

TEST_CASE("single engine is a serial sum plus stitch") {
  oracle::Instance in;
  in.engines = {{"CPU", true, 7.0, 3.0}};
  in.tvs = {1, 5, 9, 2};
  in.thr = 3;
  in.t_stitch = 4;
  CHECK(run(in).makespan_ms == 4 * 7.0 + 4);
}

TEST_CASE("quality of a schedule") {
  oracle::Instance in;
  in.engines = {{"CPU", true, 1.0, std::nullopt}, {"DSP", false, std::nullopt, 1.0}};
  in.tvs = {1, 9};
  in.thr = 5;
  const auto r = run(in);
  profile::QualityProfile q;
  q.records = {{"p0", 1, {{"a", 30.0}, {"b", 28.0}}}, {"p1", 9, {{"a", 20.0}, {"b", 19.5}}}};
  CHECK(quality_of_schedule(r, q).mean_db == 24.75);
  q.records[0].psnr["a"] = imaging::kInfinitePsnr;
  const auto s = quality_of_schedule(r, q);
  CHECK(s.mean_db == 19.5);
  CHECK(s.infinite == 1);
  q.records[1].psnr.erase("b");
  CHECK_THROWS_AS(quality_of_schedule(r, q), Error);
}

TEST_CASE("preconditions") {
  auto in = six_patch();
  in.engines[0].t_m1.reset();
  CHECK_THROWS_AS(run(in), Error);
  in = six_patch();
  in.tvs.clear();
  CHECK_THROWS_AS(run(in), Error);
  CHECK_THROWS_AS(schedule(oracle::tv_values({1}), {"a", "zzz"}, tv::TvThreshold(0),
                           oracle::to_profile(six_patch())),
                  Error);
}

TEST_CASE("random instances match the brute-force trace and keep the invariants") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto in = oracle::random_instance(rng);
    const auto got = run(in);
    const auto want = oracle::brute_force_schedule(in);
    REQUIRE(got.assignments.size() == want.steps.size());
    double busy = 0.0;
    for (std::size_t p = 0; p < want.steps.size(); ++p) {
      const auto& a = got.assignments[p];
      CHECK(a.engine == want.steps[p].engine);
      CHECK(a.start_ms == want.steps[p].start);
      CHECK(a.finish_ms == want.steps[p].finish);
      CHECK((a.role == ModelRole::m2) == want.steps[p].uses_m2);
      if (!a.hard) {
        CHECK(a.role == ModelRole::m1);
        CHECK(in.engines[a.engine].preserving);
      }
      busy += a.finish_ms - a.start_ms;
    }
    CHECK(got.t_end == want.t_end);
    CHECK(got.makespan_ms == want.makespan);
    double ends = 0.0;
    for (double t : got.t_end) ends += t;
    CHECK(ends == doctest::Approx(busy));
    CHECK(run(in).makespan_ms == got.makespan_ms);
  }
}

TEST_CASE("serialization") {
  const auto r = run(six_patch());
  const auto doc = to_json(r);
  CHECK(doc["makespan_ms"] == 40);
  CHECK(doc["assignments"].size() == 6);
  const auto csv = to_csv(r);
  CHECK(csv.rfind("patch,engine,model,role,start_ms,finish_ms,hard\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
}
