#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "srplan/error.hpp"
#include "srplan/io.hpp"
#include "srplan/profile.hpp"

namespace srplan::profile {

using json = nlohmann::json;

double QualityProfile::psnr(std::size_t record, std::string_view model) const {
  const auto& r = records.at(record);
  const auto it = r.psnr.find(model);
  if (it == r.psnr.end()) {
    throw Error(ErrorKind::validation, "quality record '" + r.patch_id + "' has no PSNR for '" +
                                           std::string(model) + "'");
  }
  return it->second;
}

std::vector<tv::TvValue> QualityProfile::tv_values() const {
  std::vector<tv::TvValue> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.emplace_back(r.tv);
  }
  return out;
}

tv::CalibrationSet QualityProfile::as_calibration() const {
  tv::CalibrationSet cal;
  cal.tv_values = tv_values();
  for (const auto& r : records) {
    cal.sources.push_back(r.patch_id);
  }
  cal.validate();
  return cal;
}

void QualityProfile::validate_against(const modelspace::Catalog& catalog) const {
  for (const auto& r : records) {
    for (const auto& [model, db] : r.psnr) {
      if (catalog.find(model) == nullptr) {
        throw Error(ErrorKind::validation, "quality record '" + r.patch_id +
                                               "' names model '" + model +
                                               "' which is not in the catalog");
      }
    }
  }
}

json to_json(const QualityProfile& quality) {
  json records = json::array();
  for (const auto& r : quality.records) {
    json psnr = json::object();
    for (const auto& [model, db] : r.psnr) {
      psnr[model] = std::isinf(db) ? json("inf") : json(db);
    }
    records.push_back({{"patch_id", r.patch_id}, {"tv", r.tv}, {"psnr", psnr}});
  }
  return {{"records", records}};
}

QualityProfile quality_profile_from_json(const json& doc) {
  auto fail = [](const std::string& why) {
    throw Error(ErrorKind::validation, "quality profile: " + why);
  };
  if (!doc.is_object() || !doc.contains("records") || !doc["records"].is_array()) {
    fail("expected {\"records\": [...]}");
  }
  QualityProfile q;
  for (const auto& jr : doc["records"]) {
    if (!jr.is_object()) {
      fail("records must be objects");
    }
    QualityRecord r;
    if (!jr.contains("patch_id") || !jr["patch_id"].is_string()) {
      fail("record needs a string 'patch_id'");
    }
    r.patch_id = jr["patch_id"].get<std::string>();
    if (!jr.contains("tv") || !jr["tv"].is_number()) {
      fail("record '" + r.patch_id + "' needs a numeric 'tv'");
    }
    r.tv = jr["tv"].get<double>();
    if (!std::isfinite(r.tv) || r.tv < 0.0) {
      fail("record '" + r.patch_id + "' has a negative or non-finite tv");
    }
    if (!jr.contains("psnr") || !jr["psnr"].is_object()) {
      fail("record '" + r.patch_id + "' needs a 'psnr' object");
    }
    for (const auto& [model, value] : jr["psnr"].items()) {
      const double db = io::number_from_json(value, "quality record '" + r.patch_id + "'");
      if (std::isnan(db) || db == -std::numeric_limits<double>::infinity()) {
        fail("record '" + r.patch_id + "' has an invalid PSNR for '" + model + "'");
      }
      r.psnr.emplace(model, db);
    }
    q.records.push_back(std::move(r));
  }
  return q;
}

QualityProfile load_quality_profile(const std::filesystem::path& path) {
  return quality_profile_from_json(io::load_json(path));
}

double Curve::operator()(double tv) const {
  if (knots.empty()) {
    throw Error(ErrorKind::validation, "curve has no knots");
  }
  if (tv <= knots.front().first) {
    return knots.front().second;
  }
  if (tv >= knots.back().first) {
    return knots.back().second;
  }
  const auto hi = std::upper_bound(knots.begin(), knots.end(), tv,
                                   [](double x, const auto& k) { return x < k.first; });
  const auto lo = hi - 1;
  const double t = (tv - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

namespace {

void check_knots(const Curve& c, const std::string& what) {
  if (c.knots.empty()) {
    throw Error(ErrorKind::validation, what + ": curve has no knots");
  }
  for (std::size_t i = 0; i < c.knots.size(); ++i) {
    if (!std::isfinite(c.knots[i].first) || !std::isfinite(c.knots[i].second)) {
      throw Error(ErrorKind::validation, what + ": curve knots must be finite");
    }
    if (i > 0 && !(c.knots[i].first > c.knots[i - 1].first)) {
      throw Error(ErrorKind::validation, what + ": knot TVs must be strictly increasing");
    }
  }
}

void check_non_increasing(const std::vector<double>& values, const std::string& what) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[i - 1]) {
      throw Error(ErrorKind::validation, what + " must be non-increasing in TV");
    }
  }
}

Curve curve_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) {
    throw Error(ErrorKind::validation, what + ": curve must be [[tv, value], ...]");
  }
  Curve c;
  for (const auto& k : j) {
    if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
      throw Error(ErrorKind::validation, what + ": curve knots must be [tv, value]");
    }
    c.knots.emplace_back(k[0].get<double>(), k[1].get<double>());
  }
  return c;
}

json curve_to_json(const Curve& c) {
  json out = json::array();
  for (const auto& [tv, v] : c.knots) {
    out.push_back({tv, v});
  }
  return out;
}

// Uniform in [0, 1) from the top 53 bits; identical on every platform.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

void QualityCurveSpec::validate() const {
  if (base_model.empty()) {
    throw Error(ErrorKind::validation, "quality curve: base model id is empty");
  }
  check_knots(psnr, "quality curve '" + base_model + "'");
  std::set<std::string> ids{base_model};
  std::set<double> grid;
  for (const auto& k : psnr.knots) {
    grid.insert(k.first);
  }
  for (const auto& [model, gap] : gaps) {
    check_knots(gap, "gap curve '" + model + "'");
    if (!ids.insert(model).second) {
      throw Error(ErrorKind::validation, "quality curve: duplicate model '" + model + "'");
    }
    std::vector<double> values;
    for (const auto& k : gap.knots) {
      if (k.second < 0.0) {
        throw Error(ErrorKind::validation, "gap curve '" + model + "' must be >= 0");
      }
      values.push_back(k.second);
      grid.insert(k.first);
    }
    check_non_increasing(values, "gap curve '" + model + "'");
  }
  if (!(std::isfinite(noise_db) && noise_db >= 0.0)) {
    throw Error(ErrorKind::validation, "quality curve: noise_db must be >= 0");
  }
  // Every model curve is piecewise linear on the union of knots, so checking
  // the knots is enough.
  std::vector<double> level;
  for (double tv : grid) {
    level.push_back(psnr(tv));
  }
  check_non_increasing(level, "PSNR curve '" + base_model + "'");
  for (const auto& [model, gap] : gaps) {
    std::size_t i = 0;
    for (double tv : grid) {
      level[i++] -= gap(tv);
    }
    check_non_increasing(level, "PSNR curve '" + model + "'");
  }
}

json to_json(const QualityCurveSpec& spec) {
  json gaps = json::array();
  for (const auto& [model, gap] : spec.gaps) {
    gaps.push_back({{"model", model}, {"gap", curve_to_json(gap)}});
  }
  return {{"base_model", spec.base_model},
          {"psnr", curve_to_json(spec.psnr)},
          {"gaps", gaps},
          {"noise_db", spec.noise_db}};
}

QualityCurveSpec curve_spec_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("base_model") || !doc.contains("psnr")) {
    throw Error(ErrorKind::validation, "quality curve: needs 'base_model' and 'psnr'");
  }
  QualityCurveSpec spec;
  spec.base_model = doc["base_model"].get<std::string>();
  spec.psnr = curve_from_json(doc["psnr"], "quality curve");
  if (doc.contains("gaps")) {
    for (const auto& g : doc["gaps"]) {
      if (!g.is_object() || !g.contains("model") || !g.contains("gap")) {
        throw Error(ErrorKind::validation, "quality curve: gaps need 'model' and 'gap'");
      }
      spec.gaps.emplace_back(g["model"].get<std::string>(),
                             curve_from_json(g["gap"], "gap curve"));
    }
  }
  if (doc.contains("noise_db")) {
    spec.noise_db = doc["noise_db"].get<double>();
  }
  spec.validate();
  return spec;
}

QualityProfile synthesize_quality(std::span<const double> tv_values,
                                  const QualityCurveSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  QualityProfile q;
  q.records.reserve(tv_values.size());
  for (std::size_t i = 0; i < tv_values.size(); ++i) {
    const double tv = tv_values[i];
    if (!std::isfinite(tv) || tv < 0.0) {
      throw Error(ErrorKind::validation, "synthesize_quality: TVs must be finite and >= 0");
    }
    const double offset = spec.noise_db > 0.0 ? spec.noise_db * (2.0 * unit_uniform(rng) - 1.0)
                                              : 0.0;
    QualityRecord r;
    r.patch_id = "p" + std::to_string(i);
    r.tv = tv;
    double level = spec.psnr(tv) + offset;
    r.psnr.emplace(spec.base_model, level);
    for (const auto& [model, gap] : spec.gaps) {
      level -= gap(tv);
      r.psnr.emplace(model, level);
    }
    q.records.push_back(std::move(r));
  }
  return q;
}

}  // namespace srplan::profile
