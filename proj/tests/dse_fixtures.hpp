// Small synthetic DSE instances shared by the unit and acceptance tests.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "srplan/dse.hpp"

namespace fixtures {

struct SyntheticDse {
  srplan::dse::DseRequest request;
  std::vector<oracle::ModelInfo> models;
  std::vector<std::string> engines{"CPU", "GPU", "DSP"};
  std::vector<bool> preserving{true, true, false};
  std::map<std::string, std::vector<std::optional<double>>> latency;
  std::vector<double> tvs;
  std::vector<std::map<std::string, double>> psnr;
};

// Models get decreasing parameter counts, latencies and PSNR; each record's
// PSNR falls with TV and the gap between consecutive models narrows with TV.
inline SyntheticDse synthetic_dse(std::size_t n_models, std::size_t n_patches, int n_tv,
                                  std::uint64_t seed, double eps_max) {
  using namespace srplan;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SyntheticDse s;
  std::vector<modelspace::Model> models;
  for (std::size_t m = 0; m < n_models; ++m) {
    const std::string id = "m" + std::to_string(m);
    models.push_back({id, "m0", {}, 100.0 / static_cast<double>(m + 1), "", {}});
    if (m > 0) models.back().applied = {modelspace::Transformation::grp(2)};
    s.models.push_back({id, models.back().params_k});
    const double scale = 1.0 / (1.0 + 0.6 * static_cast<double>(m) + 0.2 * u(rng));
    s.latency[id] = {40.0 * scale, 30.0 * scale, 12.0 * scale};
  }
  for (std::size_t p = 0; p < n_patches; ++p) {
    const double tv = std::floor(u(rng) * 1000.0);
    s.tvs.push_back(tv);
    std::map<std::string, double> rec;
    double level = 36.0 - tv / 100.0 + u(rng);
    for (std::size_t m = 0; m < n_models; ++m) {
      rec["m" + std::to_string(m)] = level;
      level -= (0.6 + u(rng) * 0.2) * (1.0 - tv / 1200.0);
    }
    s.psnr.push_back(rec);
  }

  std::vector<profile::Engine> engines{
      {"CPU", "fp32", true}, {"GPU", "fp16", true}, {"DSP", "int8", false}};
  std::map<std::string, profile::DeviceProfile::Row, std::less<>> table(s.latency.begin(),
                                                                         s.latency.end());
  s.request.catalog = modelspace::Catalog(models);
  s.request.device =
      profile::DeviceProfile(profile::EngineSet(engines), {}, 0.5, std::move(table));
  for (std::size_t p = 0; p < n_patches; ++p) {
    profile::QualityRecord r{"p" + std::to_string(p), s.tvs[p], {}};
    for (const auto& [k, v] : s.psnr[p]) r.psnr.emplace(k, v);
    s.request.quality.records.push_back(r);
  }
  s.request.calibration = s.request.quality.as_calibration();
  s.request.n_tv = n_tv;
  s.request.eps_max_db = eps_max;
  s.request.reference = "m0";
  return s;
}

inline std::vector<oracle::DesignRow> oracle_table(const SyntheticDse& s,
                                                   const std::vector<std::string>& retained) {
  std::vector<oracle::ModelInfo> kept;
  for (const auto& m : s.models) {
    if (std::find(retained.begin(), retained.end(), m.id) != retained.end()) kept.push_back(m);
  }
  std::vector<double> thresholds;
  for (const auto& t : srplan::tv::candidate_thresholds(s.request.calibration, s.request.n_tv)) {
    thresholds.push_back(t.value());
  }
  return oracle::exhaustive_dse(kept, s.engines, s.preserving, s.latency, s.tvs, s.psnr,
                                thresholds, s.request.device.t_stitch_ms(), s.request.reference,
                                s.request.eps_max_db);
}

}  // namespace fixtures
