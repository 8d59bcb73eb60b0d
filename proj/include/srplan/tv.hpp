#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "srplan/imaging.hpp"

namespace srplan::tv {

/// Anisotropic total variation of a patch, on the 8-bit intensity scale.
class TvValue {
 public:
  TvValue() = default;
  /// Throws Error{validation} for negative or non-finite values.
  explicit TvValue(double value);

  double value() const noexcept { return value_; }
  auto operator<=>(const TvValue&) const = default;

 private:
  double value_ = 0.0;
};

/// Hard/easy boundary. +infinity is allowed and classifies every patch easy.
class TvThreshold {
 public:
  TvThreshold() = default;
  explicit TvThreshold(double value);

  static TvThreshold infinite();

  double value() const noexcept { return value_; }
  auto operator<=>(const TvThreshold&) const = default;

 private:
  double value_ = 0.0;
};

/// Channel space the TV is computed in. `luma` is the default; `rgb_sum`
/// adds the per-channel TVs.
enum class ChannelMode { luma, rgb_sum };

ChannelMode parse_channel_mode(std::string_view name);

TvValue total_variation(const imaging::Grid& grid);
TvValue total_variation(const imaging::Image& image, ChannelMode mode = ChannelMode::luma);
TvValue total_variation(const imaging::Patch& patch, ChannelMode mode = ChannelMode::luma);

/// Strict: a patch exactly at the threshold is easy.
inline bool is_hard(TvValue tv, TvThreshold thr) noexcept { return tv.value() > thr.value(); }

struct CalibrationSet {
  std::vector<TvValue> tv_values;
  std::vector<std::string> sources;  // one per value, may be empty

  /// Throws Error{validation} when empty or when sources and values disagree.
  void validate() const;
};

CalibrationSet calibrate(std::span<const imaging::Patch> patches, const std::string& source,
                         ChannelMode mode = ChannelMode::luma);

nlohmann::json to_json(const CalibrationSet& cal);
CalibrationSet calibration_from_json(const nlohmann::json& doc);
CalibrationSet load_calibration(const std::filesystem::path& path);

/// `n_tv` thresholds at evenly spaced quantiles (0% .. 100%) of the
/// calibration TVs, interpolating linearly between order statistics.
std::vector<TvThreshold> candidate_thresholds(const CalibrationSet& cal, int n_tv);

}  // namespace srplan::tv
