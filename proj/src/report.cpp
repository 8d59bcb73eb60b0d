#include "srplan/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "srplan/io.hpp"
#include "srplan/perfmodel.hpp"

namespace srplan::report {

std::vector<TvSweepRow> tv_sweep(const dse::DseRequest& request,
                                 const scheduler::ModelPair& pair) {
  request.validate();
  auto thresholds = tv::candidate_thresholds(request.calibration, request.n_tv);
  std::reverse(thresholds.begin(), thresholds.end());
  const auto tvs = request.quality.tv_values();

  std::vector<TvSweepRow> rows;
  for (const auto& thr : thresholds) {
    TvSweepRow row;
    row.thr = thr.value();
    row.hard_patches = static_cast<std::size_t>(std::count_if(
        tvs.begin(), tvs.end(), [&](const tv::TvValue& v) { return tv::is_hard(v, thr); }));
    const auto sim = scheduler::schedule(tvs, pair, thr, request.device);
    row.simulated_ms = sim.makespan_ms;
    row.simulated_psnr_db = scheduler::quality_of_schedule(sim, request.quality).mean_db;
    row.strict_ms = perfmodel::strict_split_estimate(tvs, pair, thr, request.device).latency_ms;
    row.strict_psnr_db = perfmodel::strict_split_quality(request.quality, pair, thr).mean_db;
    row.bound_ms = perfmodel::fractional_lower_bound(tvs, pair, thr, request.device);
    rows.push_back(row);
  }
  return rows;
}

std::string tv_sweep_csv(std::span<const TvSweepRow> rows) {
  std::ostringstream out;
  out << "thr,hard_patches,simulated_ms,simulated_psnr_db,strict_ms,strict_psnr_db,bound_ms\n";
  for (const auto& r : rows) {
    out << io::format_number(r.thr) << ',' << r.hard_patches << ','
        << io::format_number(r.simulated_ms) << ',' << io::format_number(r.simulated_psnr_db)
        << ',' << io::format_number(r.strict_ms) << ',' << io::format_number(r.strict_psnr_db)
        << ',' << io::format_number(r.bound_ms) << '\n';
  }
  return out.str();
}

std::vector<Baseline> reference_baselines(const dse::DseRequest& request) {
  const auto& device = request.device;
  const auto tvs = request.quality.tv_values();
  std::vector<Baseline> out;
  std::string all;
  for (const auto& e : device.engines()) {
    if (!e.psnr_preserving) {
      continue;
    }
    out.push_back({request.reference + "@" + e.name,
                   perfmodel::single_engine_total(tvs.size(), request.reference, e.name, device) +
                       device.t_stitch_ms()});
    all += (all.empty() ? "" : "+") + e.name;
  }
  if (out.size() > 1) {
    const auto sched = scheduler::schedule(tvs, {request.reference, request.reference},
                                           tv::TvThreshold::infinite(), device);
    out.push_back({request.reference + "@" + all, sched.makespan_ms});
  }
  return out;
}

std::vector<EpsRow> eps_sweep(const dse::DseRequest& request, std::span<const double> eps_values,
                              std::span<const Baseline> baselines,
                              const dse::SearchOptions& options) {
  auto open = request;
  open.eps_max_db = std::numeric_limits<double>::infinity();
  const auto table = dse::search(open, options).table;

  std::vector<EpsRow> rows;
  for (double eps : eps_values) {
    std::vector<dse::Design> scored(table.begin(), table.end());
    for (auto& d : scored) {
      d.feasible = std::isfinite(d.latency_ms) && d.psnr_drop_db <= eps;
    }
    const auto best = std::min_element(scored.begin(), scored.end(), dse::ranks_before);
    EpsRow row;
    row.eps_max_db = eps;
    row.best = *best;
    row.status = best->feasible ? dse::SearchStatus::feasible : dse::SearchStatus::no_feasible;
    for (const auto& b : baselines) {
      row.speedup.push_back(best->feasible ? b.latency_ms / best->latency_ms : 0.0);
    }
    rows.push_back(row);
  }
  return rows;
}

std::string eps_sweep_csv(std::span<const EpsRow> rows, std::span<const Baseline> baselines) {
  std::ostringstream out;
  out << "eps_max_db,feasible,m1,m2,thr,latency_ms,psnr_db,psnr_drop_db";
  for (const auto& b : baselines) {
    out << ",speedup_vs_" << b.label;
  }
  out << '\n';
  for (const auto& r : rows) {
    out << io::format_number(r.eps_max_db) << ',' << (r.best.feasible ? 1 : 0) << ','
        << r.best.m1 << ',' << r.best.m2 << ',' << io::format_number(r.best.thr) << ','
        << io::format_number(r.best.latency_ms) << ',' << io::format_number(r.best.psnr_db)
        << ',' << io::format_number(r.best.psnr_drop_db);
    for (double s : r.speedup) {
      out << ',' << io::format_number(s);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace srplan::report
