#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "srplan/profile.hpp"
#include "srplan/scheduler.hpp"
#include "srplan/tv.hpp"

namespace srplan::perfmodel {

enum class EstimatorKind { strict_split, fractional_bound, simulated };

std::string_view to_string(EstimatorKind kind);

struct EngineLoad {
  std::string engine;
  double busy_ms = 0.0;
  std::size_t patches = 0;
};

struct LatencyEstimate {
  EstimatorKind kind = EstimatorKind::strict_split;
  std::vector<EngineLoad> loads;  // one per engine, EngineSet order
  double t_stitch_ms = 0.0;
  double latency_ms = 0.0;        // max busy + t_stitch
};

/// t_ce added n times, the way an engine's end time accumulates.
double serial_total(std::size_t n_patches, double t_ce);

/// n * t_ce(model, engine), summed serially.
double single_engine_total(std::size_t n_patches, std::string_view model,
                           std::string_view engine, const profile::DeviceProfile& profile);

/// Split of m1's easy patches over the psnr-preserving engines (in EngineSet
/// order) proportional to each engine's m1 throughput.
std::vector<double> default_m1_split(const scheduler::ModelPair& pair,
                                     const profile::DeviceProfile& profile);

/// Unity-function model: easy patches run m1 only, divided over preserving
/// engines by `m1_split` (floor of each share, remainder to the fastest);
/// hard patches run m2 only, divided over its engines by throughput.
LatencyEstimate strict_split_estimate(std::span<const tv::TvValue> patch_tvs,
                                      const scheduler::ModelPair& pair, tv::TvThreshold thr,
                                      const profile::DeviceProfile& profile,
                                      std::optional<std::vector<double>> m1_split = std::nullopt);

/// Mean PSNR with easy patches on m1 and hard patches on m2.
scheduler::QualitySummary strict_split_quality(const profile::QualityProfile& quality,
                                               const scheduler::ModelPair& pair,
                                               tv::TvThreshold thr);

/// Makespan when patch work is divisible: easy work confined to preserving
/// engines, hard work free to use every eligible engine. Never exceeds the
/// makespan of any discrete schedule with the same eligibility.
double fractional_lower_bound(std::span<const tv::TvValue> patch_tvs,
                              const scheduler::ModelPair& pair, tv::TvThreshold thr,
                              const profile::DeviceProfile& profile);

LatencyEstimate simulated_estimate(const scheduler::ScheduleResult& result);

nlohmann::json to_json(const LatencyEstimate& estimate);
std::string to_csv(const LatencyEstimate& estimate);

}  // namespace srplan::perfmodel
