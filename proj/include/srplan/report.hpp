#pragma once

#include <span>
#include <string>
#include <vector>

#include "srplan/dse.hpp"
#include "srplan/scheduler.hpp"

namespace srplan::report {

/// One threshold of a latency/PSNR-vs-TV sweep.
struct TvSweepRow {
  double thr = 0.0;
  std::size_t hard_patches = 0;
  double simulated_ms = 0.0;
  double simulated_psnr_db = 0.0;
  double strict_ms = 0.0;
  double strict_psnr_db = 0.0;
  double bound_ms = 0.0;
};

/// Evaluates `pair` at every candidate threshold, from the largest to the
/// smallest.
std::vector<TvSweepRow> tv_sweep(const dse::DseRequest& request, const scheduler::ModelPair& pair);

std::string tv_sweep_csv(std::span<const TvSweepRow> rows);

/// Latency of the reference model running without the compact model.
struct Baseline {
  std::string label;  // "<ref>@<engine>" or "<ref>@<e1>+<e2>..."
  double latency_ms = 0.0;
};

/// The reference model alone on each psnr-preserving engine, then on all of
/// them together (load balanced).
std::vector<Baseline> reference_baselines(const dse::DseRequest& request);

struct EpsRow {
  double eps_max_db = 0.0;
  dse::SearchStatus status = dse::SearchStatus::no_feasible;
  dse::Design best;
  std::vector<double> speedup;  // baseline latency / design latency, per baseline
};

/// Fastest feasible design per tolerance, from a single exhaustive table.
std::vector<EpsRow> eps_sweep(const dse::DseRequest& request, std::span<const double> eps_values,
                              std::span<const Baseline> baselines,
                              const dse::SearchOptions& options = {});

std::string eps_sweep_csv(std::span<const EpsRow> rows, std::span<const Baseline> baselines);

}  // namespace srplan::report
