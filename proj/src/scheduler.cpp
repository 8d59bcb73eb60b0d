#include "srplan/scheduler.hpp"

#include <algorithm>
#include <sstream>

#include "srplan/error.hpp"
#include "srplan/io.hpp"

namespace srplan::scheduler {

std::vector<ModelRole> ScheduleResult::model_choice() const {
  std::vector<ModelRole> out;
  out.reserve(assignments.size());
  for (const auto& a : assignments) {
    out.push_back(a.role);
  }
  return out;
}

Eligibility eligibility(const ModelPair& pair, const profile::DeviceProfile& profile) {
  const auto& engines = profile.engines();
  if (engines.size() == 0) {
    throw Error(ErrorKind::validation, "empty engine set");
  }
  for (const auto& m : {pair.m1, pair.m2}) {
    if (!profile.has_model(m)) {
      throw Error(ErrorKind::validation, "model '" + m + "' is not in the device profile");
    }
  }
  Eligibility el;
  el.latency.assign(engines.size(), 0.0);
  el.role.assign(engines.size(), ModelRole::m1);
  for (std::size_t i = 0; i < engines.size(); ++i) {
    if (engines[i].psnr_preserving) {
      el.latency[i] = profile.require_latency(pair.m1, i);
      el.easy.push_back(i);
      el.hard.push_back(i);
    } else if (auto t = profile.latency(pair.m2, i)) {
      el.latency[i] = *t;
      el.role[i] = ModelRole::m2;
      el.hard.push_back(i);
    }
  }
  return el;
}

ScheduleResult schedule(std::span<const tv::TvValue> patch_tvs, const ModelPair& pair,
                        tv::TvThreshold thr, const profile::DeviceProfile& profile) {
  if (patch_tvs.empty()) {
    throw Error(ErrorKind::invalid_argument, "schedule needs at least one patch");
  }
  const Eligibility el = eligibility(pair, profile);

  ScheduleResult result;
  result.pair = pair;
  for (const auto& e : profile.engines()) {
    result.engine_names.push_back(e.name);
  }
  result.t_end.assign(profile.engines().size(), 0.0);
  result.t_stitch_ms = profile.t_stitch_ms();
  result.assignments.reserve(patch_tvs.size());

  for (std::size_t p = 0; p < patch_tvs.size(); ++p) {
    const bool hard = tv::is_hard(patch_tvs[p], thr);
    const auto& candidates = hard ? el.hard : el.easy;
    std::size_t best = candidates.front();
    double best_finish = result.t_end[best] + el.latency[best];
    for (std::size_t i : candidates) {
      const double finish = result.t_end[i] + el.latency[i];
      if (finish < best_finish) {
        best = i;
        best_finish = finish;
      }
    }
    const ModelRole role = el.role[best];
    result.assignments.push_back({p, best, result.engine_names[best], role,
                                  role == ModelRole::m1 ? pair.m1 : pair.m2,
                                  result.t_end[best], best_finish, hard});
    result.t_end[best] = best_finish;
  }
  result.makespan_ms =
      *std::max_element(result.t_end.begin(), result.t_end.end()) + result.t_stitch_ms;
  return result;
}

QualitySummary quality_of_schedule(const ScheduleResult& result,
                                   const profile::QualityProfile& quality) {
  if (quality.records.size() < result.assignments.size()) {
    throw Error(ErrorKind::validation, "quality profile has fewer records than scheduled patches");
  }
  return summarize_quality(result.assignments.size(), [&](std::size_t i) {
    const auto& a = result.assignments[i];
    return quality.psnr(a.patch, a.model);
  });
}

nlohmann::json to_json(const ScheduleResult& result) {
  using nlohmann::json;
  json assignments = json::array();
  for (const auto& a : result.assignments) {
    assignments.push_back({{"patch", a.patch},
                           {"engine", a.engine_name},
                           {"model", a.model},
                           {"role", a.role == ModelRole::m1 ? "m1" : "m2"},
                           {"start_ms", io::number_json(a.start_ms)},
                           {"finish_ms", io::number_json(a.finish_ms)},
                           {"hard", a.hard}});
  }
  json t_end = json::object();
  for (std::size_t i = 0; i < result.engine_names.size(); ++i) {
    t_end[result.engine_names[i]] = io::number_json(result.t_end[i]);
  }
  return {{"kind", "simulated"},
          {"m1", result.pair.m1},
          {"m2", result.pair.m2},
          {"assignments", assignments},
          {"t_end_ms", t_end},
          {"t_stitch_ms", io::number_json(result.t_stitch_ms)},
          {"makespan_ms", io::number_json(result.makespan_ms)}};
}

std::string to_csv(const ScheduleResult& result) {
  std::ostringstream out;
  out << "patch,engine,model,role,start_ms,finish_ms,hard\n";
  for (const auto& a : result.assignments) {
    out << a.patch << ',' << a.engine_name << ',' << a.model << ','
        << (a.role == ModelRole::m1 ? "m1" : "m2") << ',' << io::format_number(a.start_ms)
        << ',' << io::format_number(a.finish_ms) << ',' << (a.hard ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace srplan::scheduler
