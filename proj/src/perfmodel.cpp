#include "srplan/perfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "srplan/error.hpp"
#include "srplan/io.hpp"

namespace srplan::perfmodel {

using scheduler::ModelPair;

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::strict_split: return "strict-split";
    case EstimatorKind::fractional_bound: return "fractional-bound";
    case EstimatorKind::simulated: return "simulated";
  }
  return "?";
}

double serial_total(std::size_t n_patches, double t_ce) {
  double total = 0.0;
  for (std::size_t i = 0; i < n_patches; ++i) {
    total += t_ce;
  }
  return total;
}

double single_engine_total(std::size_t n_patches, std::string_view model,
                           std::string_view engine, const profile::DeviceProfile& profile) {
  return serial_total(n_patches, profile.require_latency(model, engine));
}

namespace {

std::vector<double> throughput_split(const std::vector<std::size_t>& engines,
                                     const std::vector<double>& latency) {
  std::vector<double> split;
  double total = 0.0;
  for (std::size_t i : engines) {
    split.push_back(1.0 / latency[i]);
    total += split.back();
  }
  for (double& f : split) {
    f /= total;
  }
  return split;
}

// floor(n * share) per engine; what is left goes to the fastest engine
// (first listed on ties).
std::vector<std::size_t> distribute(std::size_t n, const std::vector<std::size_t>& engines,
                                    const std::vector<double>& split,
                                    const std::vector<double>& latency) {
  std::vector<std::size_t> counts(engines.size(), 0);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < engines.size(); ++k) {
    const auto share =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * split[k] + 1e-9));
    counts[k] = std::min(share, n - assigned);
    assigned += counts[k];
  }
  std::size_t fastest = 0;
  for (std::size_t k = 1; k < engines.size(); ++k) {
    if (latency[engines[k]] < latency[engines[fastest]]) {
      fastest = k;
    }
  }
  counts[fastest] += n - assigned;
  return counts;
}

}  // namespace

std::vector<double> default_m1_split(const ModelPair& pair,
                                     const profile::DeviceProfile& profile) {
  const auto el = scheduler::eligibility(pair, profile);
  return throughput_split(el.easy, el.latency);
}

LatencyEstimate strict_split_estimate(std::span<const tv::TvValue> patch_tvs,
                                      const ModelPair& pair, tv::TvThreshold thr,
                                      const profile::DeviceProfile& profile,
                                      std::optional<std::vector<double>> m1_split) {
  const auto el = scheduler::eligibility(pair, profile);
  std::vector<double> split = m1_split ? std::move(*m1_split) : throughput_split(el.easy, el.latency);
  if (split.size() != el.easy.size()) {
    throw Error(ErrorKind::invalid_argument,
                "m1 split needs one fraction per psnr-preserving engine (" +
                    std::to_string(el.easy.size()) + ")");
  }
  double total = 0.0;
  for (double f : split) {
    if (!std::isfinite(f) || f < 0.0) {
      throw Error(ErrorKind::invalid_argument, "m1 split fractions must be >= 0");
    }
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorKind::invalid_argument, "m1 split fractions must sum to 1");
  }

  std::size_t n_hard = 0;
  for (const auto& tv : patch_tvs) {
    n_hard += tv::is_hard(tv, thr) ? 1 : 0;
  }
  const std::size_t n_easy = patch_tvs.size() - n_hard;

  std::vector<std::size_t> m2_engines;
  for (std::size_t i : el.hard) {
    if (el.role[i] == scheduler::ModelRole::m2) {
      m2_engines.push_back(i);
    }
  }
  if (n_hard > 0 && m2_engines.empty()) {
    throw Error(ErrorKind::unavailable,
                "model '" + pair.m2 + "' is unavailable on every non-preserving engine");
  }

  const std::size_t n_engines = profile.engines().size();
  std::vector<std::size_t> counts(n_engines, 0);
  const auto easy_counts = distribute(n_easy, el.easy, split, el.latency);
  for (std::size_t k = 0; k < el.easy.size(); ++k) {
    counts[el.easy[k]] = easy_counts[k];
  }
  if (!m2_engines.empty()) {
    const auto hard_counts = distribute(n_hard, m2_engines,
                                        throughput_split(m2_engines, el.latency), el.latency);
    for (std::size_t k = 0; k < m2_engines.size(); ++k) {
      counts[m2_engines[k]] = hard_counts[k];
    }
  }

  LatencyEstimate est;
  est.kind = EstimatorKind::strict_split;
  est.t_stitch_ms = profile.t_stitch_ms();
  double busiest = 0.0;
  for (std::size_t i = 0; i < n_engines; ++i) {
    const double busy = serial_total(counts[i], el.latency[i]);
    est.loads.push_back({profile.engines()[i].name, busy, counts[i]});
    busiest = std::max(busiest, busy);
  }
  est.latency_ms = busiest + est.t_stitch_ms;
  return est;
}

scheduler::QualitySummary strict_split_quality(const profile::QualityProfile& quality,
                                               const ModelPair& pair, tv::TvThreshold thr) {
  return scheduler::summarize_quality(quality.records.size(), [&](std::size_t i) {
    const bool hard = tv::is_hard(tv::TvValue(quality.records[i].tv), thr);
    return quality.psnr(i, hard ? pair.m2 : pair.m1);
  });
}

double fractional_lower_bound(std::span<const tv::TvValue> patch_tvs, const ModelPair& pair,
                              tv::TvThreshold thr, const profile::DeviceProfile& profile) {
  if (patch_tvs.empty()) {
    throw Error(ErrorKind::invalid_argument, "fractional_lower_bound needs at least one patch");
  }
  const auto el = scheduler::eligibility(pair, profile);
  std::size_t n_easy = 0;
  for (const auto& tv : patch_tvs) {
    n_easy += tv::is_hard(tv, thr) ? 0 : 1;
  }
  const std::size_t n_all = patch_tvs.size();

  // Work w confined to engine set E finishes no earlier than w / sum(rates).
  // A single engine is summed serially so it matches a schedule bit for bit;
  // otherwise the quotient is shaded down by a relative margin that covers
  // the rounding of both the quotient and the schedule's running sums.
  auto confined = [&](std::size_t work, const std::vector<std::size_t>& engines) {
    if (work == 0) {
      return 0.0;
    }
    if (engines.size() == 1) {
      return serial_total(work, el.latency[engines.front()]);
    }
    double rate = 0.0;
    for (std::size_t i : engines) {
      rate += 1.0 / el.latency[i];
    }
    const double margin =
        std::max(1e-12, 8.0 * static_cast<double>(n_all) * std::numeric_limits<double>::epsilon());
    return static_cast<double>(work) / rate * (1.0 - margin);
  };
  // Easy patches nest inside the hard patches' engine set, so these two
  // constraints are also sufficient.
  const double bound = std::max(confined(n_easy, el.easy), confined(n_all, el.hard));
  return bound + profile.t_stitch_ms();
}

LatencyEstimate simulated_estimate(const scheduler::ScheduleResult& result) {
  LatencyEstimate est;
  est.kind = EstimatorKind::simulated;
  est.t_stitch_ms = result.t_stitch_ms;
  std::vector<std::size_t> counts(result.engine_names.size(), 0);
  for (const auto& a : result.assignments) {
    ++counts[a.engine];
  }
  for (std::size_t i = 0; i < result.engine_names.size(); ++i) {
    est.loads.push_back({result.engine_names[i], result.t_end[i], counts[i]});
  }
  est.latency_ms = result.makespan_ms;
  return est;
}

nlohmann::json to_json(const LatencyEstimate& estimate) {
  using nlohmann::json;
  json loads = json::array();
  for (const auto& l : estimate.loads) {
    loads.push_back({{"engine", l.engine},
                     {"busy_ms", io::number_json(l.busy_ms)},
                     {"patches", l.patches}});
  }
  return {{"kind", to_string(estimate.kind)},
          {"loads", loads},
          {"t_stitch_ms", io::number_json(estimate.t_stitch_ms)},
          {"latency_ms", io::number_json(estimate.latency_ms)}};
}

std::string to_csv(const LatencyEstimate& estimate) {
  std::ostringstream out;
  out << "kind,engine,busy_ms,patches,latency_ms\n";
  for (const auto& l : estimate.loads) {
    out << to_string(estimate.kind) << ',' << l.engine << ',' << io::format_number(l.busy_ms)
        << ',' << l.patches << ',' << io::format_number(estimate.latency_ms) << '\n';
  }
  return out.str();
}

}  // namespace srplan::perfmodel
