#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "srplan/profile.hpp"
#include "srplan/tv.hpp"

namespace srplan::scheduler {

/// m1 is the accurate model (psnr-preserving engines), m2 the compact one
/// (the remaining engines).
struct ModelPair {
  std::string m1;
  std::string m2;

  bool operator==(const ModelPair&) const = default;
};

enum class ModelRole { m1, m2 };

struct Assignment {
  std::size_t patch = 0;
  std::size_t engine = 0;  // index into the profile's EngineSet
  std::string engine_name;
  ModelRole role = ModelRole::m1;
  std::string model;
  double start_ms = 0.0;
  double finish_ms = 0.0;
  bool hard = false;
};

struct ScheduleResult {
  ModelPair pair;
  std::vector<std::string> engine_names;
  std::vector<Assignment> assignments;  // in dispatch (= patch) order
  std::vector<double> t_end;            // per engine, ms
  double t_stitch_ms = 0.0;
  double makespan_ms = 0.0;             // max(t_end) + t_stitch

  std::vector<ModelRole> model_choice() const;
};

/// Engines allowed to take a patch, with the per-patch latency each would
/// incur. Easy patches see only psnr-preserving engines running m1; hard
/// patches additionally see non-preserving engines running m2 (where the
/// profile has m2 on them).
struct Eligibility {
  std::vector<std::size_t> easy;
  std::vector<std::size_t> hard;
  std::vector<double> latency;  // per engine; 0 where not eligible
  std::vector<ModelRole> role;  // per engine
};

/// Throws Error{unavailable} when m1 is missing on a psnr-preserving engine.
Eligibility eligibility(const ModelPair& pair, const profile::DeviceProfile& profile);

/// Difficulty-aware, load-balanced greedy dispatch. Each patch goes, in
/// input order, to the eligible engine minimising t_end + t_ce; ties go to
/// the engine listed first.
ScheduleResult schedule(std::span<const tv::TvValue> patch_tvs, const ModelPair& pair,
                        tv::TvThreshold thr, const profile::DeviceProfile& profile);

struct QualitySummary {
  double mean_db = 0.0;  // kInfinitePsnr when every record is infinite
  std::size_t counted = 0;
  std::size_t infinite = 0;
};

/// Mean PSNR of the model that actually processed each patch. Record i of
/// the quality profile describes patch i.
QualitySummary quality_of_schedule(const ScheduleResult& result,
                                   const profile::QualityProfile& quality);

/// Mean over `psnr_of(i)` that skips infinite values.
template <typename F>
QualitySummary summarize_quality(std::size_t n, F&& psnr_of) {
  QualitySummary s;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double db = psnr_of(i);
    if (std::isinf(db)) {
      ++s.infinite;
      continue;
    }
    sum += db;
    ++s.counted;
  }
  s.mean_db = s.counted == 0 ? imaging::kInfinitePsnr : sum / static_cast<double>(s.counted);
  return s;
}

nlohmann::json to_json(const ScheduleResult& result);
std::string to_csv(const ScheduleResult& result);

}  // namespace srplan::scheduler
