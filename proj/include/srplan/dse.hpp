#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "srplan/modelspace.hpp"
#include "srplan/profile.hpp"
#include "srplan/scheduler.hpp"
#include "srplan/tv.hpp"

namespace srplan::dse {

struct ParetoPoint {
  std::string model;
  double psnr = 0.0;        // dB
  double latency = 0.0;     // ms per patch

  bool operator==(const ParetoPoint&) const = default;
};

/// True when `a` is at least as good as `b` on both axes and strictly
/// better on one.
bool dominates(const ParetoPoint& a, const ParetoPoint& b);

/// Non-dominated subset, sorted by latency ascending (then PSNR descending,
/// then model id). Identical points are all kept.
std::vector<ParetoPoint> pareto_prune(std::span<const ParetoPoint> points);

struct EngineFront {
  std::string engine;
  std::vector<ParetoPoint> points;    // every model available on the engine
  std::vector<ParetoPoint> retained;  // its Pareto front
};

/// Per-engine PSNR/latency fronts. A model's PSNR is its mean over the
/// quality records; models without latency on an engine are skipped there.
std::vector<EngineFront> engine_fronts(const modelspace::Catalog& catalog,
                                       const profile::DeviceProfile& device,
                                       const profile::QualityProfile& quality);

/// Union of the per-engine fronts, in catalog order.
std::vector<std::string> retained_models(const modelspace::Catalog& catalog,
                                         std::span<const EngineFront> fronts);

struct DseRequest {
  modelspace::Catalog catalog;
  profile::DeviceProfile device;
  profile::QualityProfile quality;    // scoring patches (record i = patch i)
  tv::CalibrationSet calibration;     // source of candidate thresholds
  double eps_max_db = 0.0;
  int n_tv = 10;
  std::string reference;

  /// Throws Error{validation} on a broken request.
  void validate() const;
};

struct Candidate {
  scheduler::ModelPair pair;
  tv::TvThreshold thr;
};

/// Ordered pairs (m1, m2) of retained models with params(m2) <= params(m1),
/// crossed with the candidate thresholds. Throws Error{validation} when no
/// pair survives.
std::vector<Candidate> enumerate_designs(const DseRequest& request,
                                         std::span<const std::string> retained);

struct Design {
  std::string m1;
  std::string m2;
  double thr = 0.0;
  double latency_ms = 0.0;
  double psnr_db = 0.0;
  double psnr_drop_db = 0.0;
  bool feasible = false;

  bool operator==(const Design&) const = default;
};

enum class SearchStatus { feasible, no_feasible };

struct SearchOptions {
  unsigned threads = 1;
  /// Screen with the strict-split estimator and simulate only the best
  /// decile. The table then holds the rescored rows only.
  bool fast_screen = false;
};

struct SearchResult {
  SearchStatus status = SearchStatus::no_feasible;
  Design best;                   // winner, or the closest infeasible design
  std::vector<Design> table;     // ranked
  double reference_psnr_db = 0.0;
  std::vector<EngineFront> fronts;
  std::vector<std::string> retained;
};

/// Mean PSNR of the reference model scheduled alone on preserving engines.
double reference_psnr(const DseRequest& request);

/// Simulates one candidate over the request's quality records.
Design evaluate_design(const DseRequest& request, const Candidate& candidate,
                       double reference_psnr_db);

/// Feasible first, then latency ascending, PSNR descending, (m1, m2, thr).
bool ranks_before(const Design& a, const Design& b);

SearchResult search(const DseRequest& request, const SearchOptions& options = {});

nlohmann::json to_json(const Design& design);
nlohmann::json to_json(const SearchResult& result);
std::string table_csv(std::span<const Design> table);
std::string fronts_csv(std::span<const EngineFront> fronts);

}  // namespace srplan::dse
