#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "srplan/imaging.hpp"
#include "srplan/modelspace.hpp"
#include "srplan/tv.hpp"

namespace srplan::profile {

struct Engine {
  std::string name;
  std::string precision;  // e.g. FP32, FP16, INT8
  bool psnr_preserving = true;

  bool operator==(const Engine&) const = default;
};

/// Ordered compute-engine set. Order is the scheduler's tie-break order.
class EngineSet {
 public:
  EngineSet() = default;
  /// Names must be unique, at least one engine, at least one psnr-preserving.
  explicit EngineSet(std::vector<Engine> engines);

  std::size_t size() const noexcept { return engines_.size(); }
  const Engine& operator[](std::size_t i) const { return engines_[i]; }
  auto begin() const noexcept { return engines_.begin(); }
  auto end() const noexcept { return engines_.end(); }

  std::optional<std::size_t> index_of(std::string_view name) const;
  std::size_t require_index(std::string_view name) const;

  bool operator==(const EngineSet&) const = default;

 private:
  std::vector<Engine> engines_;
};

/// Per-patch latency table t_ce(m) in ms. Missing pairs are stored as
/// nullopt ("unavailable"), never as zero.
class DeviceProfile {
 public:
  using Row = std::vector<std::optional<double>>;  // indexed like the EngineSet

  DeviceProfile() = default;
  DeviceProfile(EngineSet engines, imaging::PatchSize patch_size, double t_stitch_ms,
                std::map<std::string, Row, std::less<>> latency_ms);

  const EngineSet& engines() const noexcept { return engines_; }
  imaging::PatchSize patch_size() const noexcept { return patch_size_; }
  double t_stitch_ms() const noexcept { return t_stitch_ms_; }
  const std::map<std::string, Row, std::less<>>& table() const noexcept { return latency_ms_; }

  bool has_model(std::string_view model) const { return latency_ms_.contains(model); }
  std::optional<double> latency(std::string_view model, std::size_t engine) const;
  std::optional<double> latency(std::string_view model, std::string_view engine) const;
  /// Throws Error{unavailable}.
  double require_latency(std::string_view model, std::size_t engine) const;
  double require_latency(std::string_view model, std::string_view engine) const;

  DeviceProfile with_t_stitch(double t_stitch_ms) const;

  bool operator==(const DeviceProfile&) const = default;

 private:
  EngineSet engines_;
  imaging::PatchSize patch_size_;
  double t_stitch_ms_ = 0.0;
  std::map<std::string, Row, std::less<>> latency_ms_;
};

nlohmann::json to_json(const DeviceProfile& profile);
DeviceProfile device_profile_from_json(const nlohmann::json& doc);
DeviceProfile load_device_profile(const std::filesystem::path& path);

struct EnginePair {
  std::string model;
  std::string engine;
};

/// t(base) / t(other).
double speedup(const DeviceProfile& profile, const EnginePair& base, const EnginePair& other);

/// Per-patch quality observations. PSNR may be imaging::kInfinitePsnr.
struct QualityRecord {
  std::string patch_id;
  double tv = 0.0;
  std::map<std::string, double, std::less<>> psnr;

  bool operator==(const QualityRecord&) const = default;
};

struct QualityProfile {
  std::vector<QualityRecord> records;

  /// Throws Error{validation} when the record lacks the model.
  double psnr(std::size_t record, std::string_view model) const;
  std::vector<tv::TvValue> tv_values() const;
  tv::CalibrationSet as_calibration() const;

  /// Every model id named in a record must be in the catalog.
  void validate_against(const modelspace::Catalog& catalog) const;

  bool operator==(const QualityProfile&) const = default;
};

nlohmann::json to_json(const QualityProfile& quality);
QualityProfile quality_profile_from_json(const nlohmann::json& doc);
QualityProfile load_quality_profile(const std::filesystem::path& path);

/// Piecewise-linear function of TV, constant beyond its first/last knot.
struct Curve {
  std::vector<std::pair<double, double>> knots;  // (tv, value), tv strictly increasing

  double operator()(double tv) const;
};

/// Synthetic PSNR-vs-TV model. The first model follows `psnr`; each later
/// model sits `gap` dB below the one before it.
struct QualityCurveSpec {
  std::string base_model;
  Curve psnr;
  std::vector<std::pair<std::string, Curve>> gaps;
  double noise_db = 0.0;  // per-patch offset amplitude, shared by all models

  /// Each model curve non-increasing in TV; each gap >= 0 and non-increasing.
  void validate() const;
};

nlohmann::json to_json(const QualityCurveSpec& spec);
QualityCurveSpec curve_spec_from_json(const nlohmann::json& doc);

QualityProfile synthesize_quality(std::span<const double> tv_values,
                                  const QualityCurveSpec& spec, std::uint64_t seed);

}  // namespace srplan::profile
