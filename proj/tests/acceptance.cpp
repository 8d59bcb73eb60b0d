// Acceptance suite: one PASS/FAIL line per criterion.
//   srplan_acceptance                 run every criterion
//   srplan_acceptance --criterion N   run only N
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dse_fixtures.hpp"
#include "oracles.hpp"
#include "srplan/dse.hpp"
#include "srplan/imaging.hpp"
#include "srplan/io.hpp"
#include "srplan/modelspace.hpp"
#include "srplan/perfmodel.hpp"
#include "srplan/profile.hpp"
#include "srplan/scheduler.hpp"
#include "srplan/tv.hpp"

using namespace srplan;

namespace {

const std::string kData = SRPLAN_DATA_DIR;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Tolerances and limits.
constexpr double kSpeedupTol = 0.01;
constexpr double kFormulaTol = 1e-9;
constexpr double kPsnrTol = 0.01;
constexpr double kMonotoneSlack = 1e-9;  // ms / dB
constexpr int kSchedulerInstances = 1000;
constexpr int kBoundInstances = 1000;
constexpr int kImages = 50;
constexpr int kTvPatches = 1000;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("FAILED " + what);
    }
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(double v) { return io::format_number(v); }

// ------------------------------------------------------------------ 1

Outcome speedup_arithmetic() {
  Outcome o;
  const auto p = profile::load_device_profile(kData + "/sdm845_profile.json");
  const double cpu = profile::speedup(p, {"m_ref", "CPU"}, {"m_s2", "CPU"});
  const double dsp = profile::speedup(p, {"m_ref", "DSP"}, {"m_s2", "DSP"});
  o.note("CPU " + fmt(cpu) + " (paper 4.46), DSP " + fmt(dsp) + " (paper 1.25)");
  o.check(std::abs(cpu - 4.46) <= kSpeedupTol, "CPU speedup within 0.01 of 4.46");
  o.check(std::abs(dsp - 1.25) <= kSpeedupTol, "DSP speedup within 0.01 of 1.25");
  return o;
}

// ------------------------------------------------------------------ 2

Outcome cost_formulas() {
  using modelspace::LayerShape;
  using modelspace::Transformation;
  Outcome o;
  const LayerShape s16{16, 16, 3, 3, 1, 1, 1, false};
  const LayerShape d64{64, 64, 3, 3, 1, 1, 1, false};
  // Direct substitution: 16/(16*9*2) + 16/(4*16) + 1/(9*2) = 13/36.
  const double rb = modelspace::reduction_factor(Transformation::rb(2), s16);
  const double dp = modelspace::reduction_factor(Transformation::dpth(), d64);
  const double sp = modelspace::reduction_factor(Transformation::sep(), s16);
  o.check(std::abs(rb - 13.0 / 36.0) <= kFormulaTol, "rb(2) = 13/36");
  o.check(std::abs(rb - 0.36111) <= 5e-6, "rb(2) prints as 0.36111");
  o.check(std::abs(dp - (1.0 / 64 + 1.0 / 81)) <= kFormulaTol, "dpth(D=64,K=3) = 1/64 + 1/81");
  o.check(std::abs(dp - 0.02797) <= 5e-6, "dpth prints as 0.02797");
  o.check(std::abs(sp - 2.0 / 3.0) <= kFormulaTol, "sep(K=3) = 2/3");
  o.note("rb " + fmt(rb) + ", dpth " + fmt(dp) + ", sep " + fmt(sp));

  int exact = 0;
  int total = 0;
  for (std::int64_t e = 1; e <= 8; ++e) {
    for (std::int64_t S : {8, 16, 24, 64}) {
      for (std::int64_t D : {8, 32, 64}) {
        for (std::int64_t K : {1, 3, 5}) {
          const LayerShape sh{S, D, K, K, 1, 1, 1, false};
          const double r = 1.0 / static_cast<double>(e);
          const double KK = static_cast<double>(K) * static_cast<double>(K);
          const double Sd = static_cast<double>(S);
          const double Dd = static_cast<double>(D);
          const double rb_at = Sd / (Dd * KK * r) + Sd / (r * r * Dd) + 1.0 / (KK * r);
          ++total;
          exact += modelspace::reduction_factor(Transformation::invr(e), sh) == rb_at ? 1 : 0;
        }
      }
    }
  }
  o.check(exact == total, "invr(e) == rb(1/e) bit-exact on every shape");
  o.check(modelspace::reduction_factor(Transformation::invr(1), s16) ==
              modelspace::reduction_factor(Transformation::rb(1), s16),
          "invr(1) == rb(1)");
  o.note("invr identity exact on " + std::to_string(exact) + "/" + std::to_string(total));
  return o;
}

// ------------------------------------------------------------------ 3

Outcome scheduler_oracle() {
  Outcome o;
  std::mt19937_64 rng(0x5eed0001);
  int mismatches = 0;
  int unsafe = 0;
  for (int i = 0; i < kSchedulerInstances; ++i) {
    const auto in = oracle::random_instance(rng, 10, 3);
    const auto got = scheduler::schedule(oracle::tv_values(in.tvs), {"a", "b"},
                                         tv::TvThreshold(in.thr), oracle::to_profile(in));
    const auto want = oracle::brute_force_schedule(in);
    bool same = got.assignments.size() == want.steps.size() && got.t_end == want.t_end &&
                got.makespan_ms == want.makespan;
    for (std::size_t p = 0; same && p < want.steps.size(); ++p) {
      const auto& a = got.assignments[p];
      const auto& s = want.steps[p];
      same = a.engine == s.engine && (a.role == scheduler::ModelRole::m2) == s.uses_m2 &&
             a.start_ms == s.start && a.finish_ms == s.finish && a.hard == s.hard;
    }
    mismatches += same ? 0 : 1;
    for (const auto& a : got.assignments) {
      if (!a.hard && (a.role == scheduler::ModelRole::m2 || !in.engines[a.engine].preserving)) {
        ++unsafe;
      }
    }
  }
  o.note(std::to_string(kSchedulerInstances) + " instances, " + std::to_string(mismatches) +
         " mismatches, " + std::to_string(unsafe) + " unsafe assignments");
  o.check(mismatches == 0, "schedule() equals brute-force trace");
  o.check(unsafe == 0, "easy patches stay on m1 / psnr-preserving engines");
  return o;
}

// ------------------------------------------------------------------ 4

Outcome bound_property() {
  Outcome o;
  std::mt19937_64 rng(0x5eed0002);
  int violations = 0;
  double tightest = kInf;
  for (int i = 0; i < kBoundInstances; ++i) {
    const auto in = oracle::random_instance(rng, 10, 3);
    const auto p = oracle::to_profile(in);
    const auto tvs = oracle::tv_values(in.tvs);
    const tv::TvThreshold thr(in.thr);
    const double bound = perfmodel::fractional_lower_bound(tvs, {"a", "b"}, thr, p);
    const double makespan = scheduler::schedule(tvs, {"a", "b"}, thr, p).makespan_ms;
    violations += bound <= makespan ? 0 : 1;
    tightest = std::min(tightest, makespan - bound);
  }
  o.note(std::to_string(kBoundInstances) + " instances, " + std::to_string(violations) +
         " violations, smallest slack " + fmt(tightest) + " ms");
  o.check(violations == 0, "fractional_lower_bound <= simulated makespan");
  return o;
}

// ------------------------------------------------------------------ 5

Outcome tv_sweep_shape() {
  Outcome o;
  const auto device = profile::load_device_profile(kData + "/sdm845_patch_profile.json");
  const auto quality = profile::load_quality_profile(kData + "/sample_quality.json");
  const scheduler::ModelPair pair{"m_ref", "m_s2"};

  // Precondition: the synthetic profile has the required shape.
  std::vector<std::size_t> order(quality.records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return quality.records[a].tv < quality.records[b].tv; });
  bool shaped = true;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto i = order[k];
    const double gap = quality.psnr(i, pair.m1) - quality.psnr(i, pair.m2);
    shaped = shaped && gap >= 0.0;
    if (k > 0) {
      const auto j = order[k - 1];
      const double prev_gap = quality.psnr(j, pair.m1) - quality.psnr(j, pair.m2);
      shaped = shaped && gap <= prev_gap + kMonotoneSlack;
    }
  }
  o.check(shaped, "quality profile: m1 >= m2 with a gap non-increasing in TV");

  const auto tvs = quality.tv_values();
  const auto candidates = tv::candidate_thresholds(quality.as_calibration(), 10);
  std::vector<double> sweep;
  for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) sweep.push_back(it->value());

  std::vector<double> strict_ms;
  std::vector<double> strict_db;
  std::vector<double> sim_ms;
  std::ostringstream series;
  for (double thr : sweep) {
    const tv::TvThreshold t(thr);
    strict_ms.push_back(perfmodel::strict_split_estimate(tvs, pair, t, device).latency_ms);
    strict_db.push_back(perfmodel::strict_split_quality(quality, pair, t).mean_db);
    sim_ms.push_back(scheduler::schedule(tvs, pair, t, device).makespan_ms);
    series << " " << fmt(thr) << ":" << fmt(strict_ms.back()) << "ms/" << fmt(strict_db.back())
           << "dB";
  }
  o.note("strict-split sweep (thr:latency/psnr)" + series.str());

  auto first_rise = [](const std::vector<double>& v) -> long {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i] > v[i - 1] + kMonotoneSlack) return static_cast<long>(i);
    }
    return -1;
  };
  const long rise = first_rise(strict_ms);
  if (rise >= 0) {
    o.note("strict-split latency rises at thr " + fmt(sweep[static_cast<std::size_t>(rise)]) +
           ": " + fmt(strict_ms[static_cast<std::size_t>(rise) - 1]) + " -> " +
           fmt(strict_ms[static_cast<std::size_t>(rise)]) + " ms");
  }
  o.check(rise < 0, "strict-split latency non-increasing from max to min thr");
  o.check(first_rise(strict_db) < 0, "strict-split mean PSNR non-increasing");
  o.note(std::string("simulated latency ") +
         (first_rise(sim_ms) < 0 ? "is" : "is not") + " non-increasing over the same sweep");

  // (a) all-easy endpoint: m1 load balanced on the preserving engines only.
  const std::size_t n = tvs.size();
  const double cpu = device.require_latency(pair.m1, "CPU");
  const double gpu = device.require_latency(pair.m1, "GPU");
  const double dsp = device.require_latency(pair.m2, "DSP");
  const auto top = scheduler::schedule(tvs, pair, tv::TvThreshold(sweep.front()), device);
  const auto top_split =
      perfmodel::strict_split_estimate(tvs, pair, tv::TvThreshold(sweep.front()), device);
  o.check(top.makespan_ms == oracle::load_balance(n, {cpu, gpu}, device.t_stitch_ms()),
          "max thr: simulator equals CPU/GPU-only load balancing");
  o.check(top.t_end[2] == 0.0 && top_split.loads[2].patches == 0, "max thr: DSP idle");

  // (b) all-hard endpoint: below every TV nothing is restricted.
  const auto bottom = scheduler::schedule(tvs, pair, tv::TvThreshold(0.0), device);
  o.check(bottom.makespan_ms == oracle::load_balance(n, {cpu, gpu, dsp}, device.t_stitch_ms()),
          "thr below every TV: simulator equals three-engine load balancing");
  o.note("endpoints: all-easy " + fmt(top.makespan_ms) + " ms, all-hard " +
         fmt(bottom.makespan_ms) + " ms");
  return o;
}

// ------------------------------------------------------------------ 6

Outcome dse_exhaustive() {
  Outcome o;
  o.check(modelspace::design_count(3, 10) == 90, "design_count(3, 10) == 90");

  auto s = fixtures::synthetic_dse(3, 24, 10, 0x5eed0006, 0.5);
  const auto result = dse::search(s.request);
  o.check(result.retained.size() == 3, "all three models survive pruning");
  const auto rows = fixtures::oracle_table(s, result.retained);
  o.check(result.table.size() == rows.size() &&
              result.table.size() ==
                  dse::enumerate_designs(s.request, result.retained).size(),
          "table has one row per enumerated design");
  int matched = 0;
  for (const auto& r : rows) {
    for (const auto& d : result.table) {
      if (d.m1 == r.m1 && d.m2 == r.m2 && d.thr == r.thr) {
        matched += d.latency_ms == r.latency && std::abs(d.psnr_db - r.psnr) <= 1e-12 &&
                           d.feasible == r.feasible
                       ? 1
                       : 0;
      }
    }
  }
  o.check(matched == static_cast<int>(rows.size()), "every row equals the oracle's");
  const auto want = oracle::oracle_winner(rows);
  o.check(want && result.status == dse::SearchStatus::feasible && result.best.m1 == want->m1 &&
              result.best.m2 == want->m2 && result.best.thr == want->thr,
          "winner equals the oracle's row-wise minimum");
  o.note(std::to_string(rows.size()) + " designs; winner (" + result.best.m1 + ", " +
         result.best.m2 + ", " + fmt(result.best.thr) + ") at " + fmt(result.best.latency_ms) +
         " ms");

  double prev = kInf;
  std::ostringstream lat;
  for (double eps : {0.0, 0.5, 1.0, 2.0, kInf}) {
    s.request.eps_max_db = eps;
    const auto r = dse::search(s.request);
    const double l = r.status == dse::SearchStatus::feasible ? r.best.latency_ms : kInf;
    o.check(l <= prev, "winner latency non-increasing at eps " + fmt(eps));
    prev = l;
    lat << " " << fmt(eps) << ":" << fmt(l);
  }
  o.note("eps:latency" + lat.str());
  return o;
}

// ------------------------------------------------------------------ 7

Outcome imaging_round_trip() {
  Outcome o;
  std::mt19937_64 rng(0x5eed0007);
  int exact = 0;
  for (int i = 0; i < kImages; ++i) {
    imaging::PatchSize ps{90, 160};
    int overlap = 8;
    int h = 0;
    int w = 0;
    if (i < 5) {
      h = std::uniform_int_distribution<int>(90, 400)(rng);
      w = std::uniform_int_distribution<int>(160, 700)(rng);
    } else {
      ps = {std::uniform_int_distribution<int>(2, 40)(rng),
            std::uniform_int_distribution<int>(2, 40)(rng)};
      overlap = std::uniform_int_distribution<int>(0, std::min(ps.height, ps.width) - 1)(rng);
      h = std::uniform_int_distribution<int>(1, 150)(rng);
      w = std::uniform_int_distribution<int>(1, 150)(rng);
    }
    const auto img = oracle::random_image(rng, h, w, i % 3 == 0 ? 1 : 3);
    const auto parts = imaging::partition(img, ps, overlap);
    exact += imaging::stitch(parts.patches, parts.plan, 1) == img ? 1 : 0;
  }
  o.check(exact == kImages, "partition -> identity -> stitch is pixel exact");
  o.note(std::to_string(exact) + "/" + std::to_string(kImages) + " exact");

  imaging::Image a(64, 48, 3);
  imaging::Image b(64, 48, 3);
  for (auto& v : a.pixels()) v = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(0, 239)(rng));
  for (std::size_t k = 0; k < a.pixels().size(); ++k) b.pixels()[k] = a.pixels()[k] + 16;
  const double db = imaging::psnr(a, b);
  o.note("offset-16 psnr " + fmt(db) + " dB");
  o.check(std::abs(db - 24.05) <= kPsnrTol, "offset-16 psnr 24.05 +- 0.01 dB");
  return o;
}

// ------------------------------------------------------------------ 8

Outcome tv_oracle() {
  Outcome o;
  std::mt19937_64 rng(0x5eed0008);
  int exact = 0;
  int invariant = 0;
  for (int i = 0; i < kTvPatches; ++i) {
    const int h = std::uniform_int_distribution<int>(1, 16)(rng);
    const int w = std::uniform_int_distribution<int>(1, 16)(rng);
    const int ch = i % 2 ? 3 : 1;
    const int shift = std::uniform_int_distribution<int>(-60, 60)(rng);
    const auto img = oracle::random_image(rng, h, w, ch, std::max(0, -shift),
                                          std::min(255, 255 - shift));
    const double tv = tv::total_variation(img).value();
    exact += tv == oracle::brute_force_tv(img) ? 1 : 0;
    auto shifted = img;
    for (auto& v : shifted.pixels()) v = static_cast<std::uint8_t>(v + shift);
    invariant += tv::total_variation(shifted).value() == tv ? 1 : 0;
  }
  o.check(exact == kTvPatches, "total_variation equals the double loop");
  o.check(invariant == kTvPatches, "constant shifts leave TV unchanged");
  o.note(std::to_string(exact) + "/" + std::to_string(kTvPatches) + " exact, " +
         std::to_string(invariant) + " shift-invariant");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "speedup arithmetic", 1.0, speedup_arithmetic},
      {2, "cost-formula identities", 1.0, cost_formulas},
      {3, "scheduler oracle equivalence", 30.0, scheduler_oracle},
      {4, "bound property", 30.0, bound_property},
      {5, "threshold sweep shape", 10.0, tv_sweep_shape},
      {6, "dse exhaustiveness", 30.0, dse_exhaustive},
      {7, "imaging round trip", 30.0, imaging_round_trip},
      {8, "tv oracle", 10.0, tv_oracle},
  };
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }

  bool all = true;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(secs < c.limit_s, "runtime under " + fmt(c.limit_s) + " s");
    std::printf("criterion %d %s: %s (%.3f s, limit %.0f s)\n", c.id, c.name,
                o.pass ? "PASS" : "FAIL", secs, c.limit_s);
    for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
