#include "srplan/profile.hpp"

#include <cmath>
#include <set>

#include "srplan/error.hpp"
#include "srplan/io.hpp"

namespace srplan::profile {

using json = nlohmann::json;

EngineSet::EngineSet(std::vector<Engine> engines) : engines_(std::move(engines)) {
  if (engines_.empty()) {
    throw Error(ErrorKind::validation, "engine set is empty");
  }
  std::set<std::string, std::less<>> names;
  bool any_preserving = false;
  for (const auto& e : engines_) {
    if (e.name.empty()) {
      throw Error(ErrorKind::validation, "engine name must not be empty");
    }
    if (!names.insert(e.name).second) {
      throw Error(ErrorKind::validation, "duplicate engine '" + e.name + "'");
    }
    any_preserving = any_preserving || e.psnr_preserving;
  }
  if (!any_preserving) {
    throw Error(ErrorKind::validation, "engine set has no psnr-preserving engine");
  }
}

std::optional<std::size_t> EngineSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < engines_.size(); ++i) {
    if (engines_[i].name == name) {
      return i;
    }
  }
  return std::nullopt;
}

std::size_t EngineSet::require_index(std::string_view name) const {
  if (auto i = index_of(name)) {
    return *i;
  }
  throw Error(ErrorKind::validation, "unknown engine '" + std::string(name) + "'");
}

DeviceProfile::DeviceProfile(EngineSet engines, imaging::PatchSize patch_size,
                             double t_stitch_ms,
                             std::map<std::string, Row, std::less<>> latency_ms)
    : engines_(std::move(engines)),
      patch_size_(patch_size),
      t_stitch_ms_(t_stitch_ms),
      latency_ms_(std::move(latency_ms)) {
  if (engines_.size() == 0) {
    throw Error(ErrorKind::validation, "device profile has no engines");
  }
  if (!std::isfinite(t_stitch_ms_) || t_stitch_ms_ < 0.0) {
    throw Error(ErrorKind::validation, "t_stitch_ms must be finite and >= 0");
  }
  if (patch_size_.height < 1 || patch_size_.width < 1) {
    throw Error(ErrorKind::validation, "patch_size must be positive");
  }
  for (const auto& [model, row] : latency_ms_) {
    if (row.size() != engines_.size()) {
      throw Error(ErrorKind::validation,
                  "latency row for '" + model + "' does not cover every engine");
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] && !(std::isfinite(*row[i]) && *row[i] > 0.0)) {
        throw Error(ErrorKind::validation, "latency of '" + model + "' on " +
                                               engines_[i].name + " must be > 0");
      }
    }
  }
}

std::optional<double> DeviceProfile::latency(std::string_view model, std::size_t engine) const {
  const auto it = latency_ms_.find(model);
  if (it == latency_ms_.end() || engine >= it->second.size()) {
    return std::nullopt;
  }
  return it->second[engine];
}

std::optional<double> DeviceProfile::latency(std::string_view model,
                                             std::string_view engine) const {
  const auto i = engines_.index_of(engine);
  return i ? latency(model, *i) : std::nullopt;
}

double DeviceProfile::require_latency(std::string_view model, std::size_t engine) const {
  if (auto t = latency(model, engine)) {
    return *t;
  }
  throw Error(ErrorKind::unavailable,
              "model '" + std::string(model) + "' is unavailable on engine '" +
                  (engine < engines_.size() ? engines_[engine].name : std::string("?")) + "'");
}

double DeviceProfile::require_latency(std::string_view model, std::string_view engine) const {
  return require_latency(model, engines_.require_index(engine));
}

DeviceProfile DeviceProfile::with_t_stitch(double t_stitch_ms) const {
  return DeviceProfile(engines_, patch_size_, t_stitch_ms, latency_ms_);
}

json to_json(const DeviceProfile& profile) {
  json engines = json::array();
  for (const auto& e : profile.engines()) {
    engines.push_back(
        {{"name", e.name}, {"precision", e.precision}, {"psnr_preserving", e.psnr_preserving}});
  }
  json latency = json::object();
  for (const auto& [model, row] : profile.table()) {
    json per_engine = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      per_engine[profile.engines()[i].name] = row[i] ? json(*row[i]) : json(nullptr);
    }
    latency[model] = per_engine;
  }
  return {{"engines", engines},
          {"patch_size", {profile.patch_size().height, profile.patch_size().width}},
          {"t_stitch_ms", profile.t_stitch_ms()},
          {"latency_ms", latency}};
}

DeviceProfile device_profile_from_json(const json& doc) {
  auto fail = [](const std::string& why) -> void {
    throw Error(ErrorKind::validation, "device profile: " + why);
  };
  if (!doc.is_object()) {
    fail("expected an object");
  }
  for (const char* key : {"engines", "latency_ms"}) {
    if (!doc.contains(key)) {
      fail(std::string("missing '") + key + "'");
    }
  }
  if (!doc["engines"].is_array()) {
    fail("'engines' must be an array");
  }
  std::vector<Engine> engines;
  for (const auto& je : doc["engines"]) {
    if (!je.is_object() || !je.contains("name") || !je["name"].is_string()) {
      fail("engine entries need a string 'name'");
    }
    Engine e;
    e.name = je["name"].get<std::string>();
    if (je.contains("precision")) {
      if (!je["precision"].is_string()) {
        fail("engine precision must be a string");
      }
      e.precision = je["precision"].get<std::string>();
    }
    if (!je.contains("psnr_preserving") || !je["psnr_preserving"].is_boolean()) {
      fail("engine '" + e.name + "' needs a boolean 'psnr_preserving'");
    }
    e.psnr_preserving = je["psnr_preserving"].get<bool>();
    engines.push_back(std::move(e));
  }
  EngineSet set(std::move(engines));

  imaging::PatchSize patch;
  if (doc.contains("patch_size")) {
    const auto& ps = doc["patch_size"];
    if (!ps.is_array() || ps.size() != 2 || !ps[0].is_number_integer() ||
        !ps[1].is_number_integer()) {
      fail("'patch_size' must be [height, width]");
    }
    patch = {ps[0].get<int>(), ps[1].get<int>()};
  }
  double t_stitch = 0.0;
  if (doc.contains("t_stitch_ms")) {
    if (!doc["t_stitch_ms"].is_number()) {
      fail("'t_stitch_ms' must be a number");
    }
    t_stitch = doc["t_stitch_ms"].get<double>();
  }

  const auto& jl = doc["latency_ms"];
  if (!jl.is_object()) {
    fail("'latency_ms' must be an object");
  }
  std::map<std::string, DeviceProfile::Row, std::less<>> table;
  for (const auto& [model, per_engine] : jl.items()) {
    if (!per_engine.is_object()) {
      fail("latency row for '" + model + "' must be an object");
    }
    DeviceProfile::Row row(set.size());
    std::vector<bool> seen(set.size(), false);
    for (const auto& [engine, value] : per_engine.items()) {
      const auto idx = set.index_of(engine);
      if (!idx) {
        fail("latency row for '" + model + "' names unknown engine '" + engine + "'");
      }
      seen[*idx] = true;
      if (value.is_null()) {
        continue;
      }
      if (!value.is_number()) {
        fail("latency of '" + model + "' on " + engine + " must be a number or null");
      }
      row[*idx] = value.get<double>();
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (!seen[i]) {
        fail("latency row for '" + model + "' lacks engine '" + set[i].name +
             "' (use null for unavailable)");
      }
    }
    table.emplace(model, std::move(row));
  }
  return DeviceProfile(std::move(set), patch, t_stitch, std::move(table));
}

DeviceProfile load_device_profile(const std::filesystem::path& path) {
  return device_profile_from_json(io::load_json(path));
}

double speedup(const DeviceProfile& profile, const EnginePair& base, const EnginePair& other) {
  return profile.require_latency(base.model, base.engine) /
         profile.require_latency(other.model, other.engine);
}

}  // namespace srplan::profile
