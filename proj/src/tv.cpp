#include "srplan/tv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "srplan/error.hpp"
#include "srplan/io.hpp"

namespace srplan::tv {

TvValue::TvValue(double value) : value_(value) {
  if (!std::isfinite(value) || value < 0.0) {
    throw Error(ErrorKind::validation, "TV value must be finite and non-negative");
  }
}

TvThreshold::TvThreshold(double value) : value_(value) {
  if (std::isnan(value) || value < 0.0) {
    throw Error(ErrorKind::validation, "TV threshold must be non-negative");
  }
}

TvThreshold TvThreshold::infinite() {
  return TvThreshold(std::numeric_limits<double>::infinity());
}

ChannelMode parse_channel_mode(std::string_view name) {
  if (name == "luma") {
    return ChannelMode::luma;
  }
  if (name == "rgb-sum" || name == "rgb_sum") {
    return ChannelMode::rgb_sum;
  }
  throw Error(ErrorKind::invalid_argument, "unknown TV channel mode '" + std::string(name) + "'");
}

TvValue total_variation(const imaging::Grid& grid) {
  double sum = 0.0;
  for (int i = 0; i < grid.rows; ++i) {
    for (int j = 0; j < grid.cols; ++j) {
      const double p = grid.at(i, j);
      if (i + 1 < grid.rows) {
        sum += std::abs(grid.at(i + 1, j) - p);
      }
      if (j + 1 < grid.cols) {
        sum += std::abs(grid.at(i, j + 1) - p);
      }
    }
  }
  return TvValue(sum);
}

namespace {

// Luma in thousandths (299 R + 587 G + 114 B) keeps the sum exact, so a
// constant shift of every sample leaves the result bit-identical.
TvValue integer_tv(const imaging::Image& image, int channel, bool luma) {
  const int h = image.height();
  const int w = image.width();
  std::vector<std::int64_t> y(static_cast<std::size_t>(h) * static_cast<std::size_t>(w));
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      std::int64_t v = 0;
      if (luma && image.channels() == 3) {
        v = 299 * image.at(r, c, 0) + 587 * image.at(r, c, 1) + 114 * image.at(r, c, 2);
      } else {
        v = 1000 * image.at(r, c, channel);
      }
      y[static_cast<std::size_t>(r) * static_cast<std::size_t>(w) + static_cast<std::size_t>(c)] = v;
    }
  }
  std::int64_t sum = 0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * static_cast<std::size_t>(w) +
                            static_cast<std::size_t>(c);
      if (r + 1 < h) {
        sum += std::abs(y[i + static_cast<std::size_t>(w)] - y[i]);
      }
      if (c + 1 < w) {
        sum += std::abs(y[i + 1] - y[i]);
      }
    }
  }
  return TvValue(static_cast<double>(sum) / 1000.0);
}

}  // namespace

TvValue total_variation(const imaging::Image& image, ChannelMode mode) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw Error(ErrorKind::validation, "total_variation needs 1 or 3 channels");
  }
  if (mode == ChannelMode::luma || image.channels() == 1) {
    return integer_tv(image, 0, true);
  }
  double sum = 0.0;
  for (int ch = 0; ch < image.channels(); ++ch) {
    sum += integer_tv(image, ch, false).value();
  }
  return TvValue(sum);
}

TvValue total_variation(const imaging::Patch& patch, ChannelMode mode) {
  return total_variation(patch.pixels, mode);
}

void CalibrationSet::validate() const {
  if (tv_values.empty()) {
    throw Error(ErrorKind::validation, "calibration set is empty");
  }
  if (!sources.empty() && sources.size() != tv_values.size()) {
    throw Error(ErrorKind::validation, "calibration sources and tv_values differ in length");
  }
}

CalibrationSet calibrate(std::span<const imaging::Patch> patches, const std::string& source,
                         ChannelMode mode) {
  CalibrationSet cal;
  for (const auto& p : patches) {
    cal.tv_values.push_back(total_variation(p, mode));
    cal.sources.push_back(source + "#" + std::to_string(p.index));
  }
  cal.validate();
  return cal;
}

nlohmann::json to_json(const CalibrationSet& cal) {
  nlohmann::json values = nlohmann::json::array();
  for (const auto& v : cal.tv_values) {
    values.push_back(v.value());
  }
  return {{"tv_values", values}, {"sources", cal.sources}};
}

CalibrationSet calibration_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("tv_values") || !doc["tv_values"].is_array()) {
    throw Error(ErrorKind::validation, "calibration: expected {\"tv_values\": [...]}");
  }
  CalibrationSet cal;
  for (const auto& v : doc["tv_values"]) {
    if (!v.is_number()) {
      throw Error(ErrorKind::validation, "calibration: tv_values must be numbers");
    }
    cal.tv_values.emplace_back(v.get<double>());
  }
  if (doc.contains("sources")) {
    if (!doc["sources"].is_array()) {
      throw Error(ErrorKind::validation, "calibration: sources must be an array");
    }
    for (const auto& s : doc["sources"]) {
      if (!s.is_string()) {
        throw Error(ErrorKind::validation, "calibration: sources must be strings");
      }
      cal.sources.push_back(s.get<std::string>());
    }
  }
  cal.validate();
  return cal;
}

CalibrationSet load_calibration(const std::filesystem::path& path) {
  return calibration_from_json(io::load_json(path));
}

std::vector<TvThreshold> candidate_thresholds(const CalibrationSet& cal, int n_tv) {
  if (n_tv < 2) {
    throw Error(ErrorKind::invalid_argument, "n_tv must be at least 2");
  }
  cal.validate();
  std::vector<double> sorted;
  sorted.reserve(cal.tv_values.size());
  for (const auto& v : cal.tv_values) {
    sorted.push_back(v.value());
  }
  std::sort(sorted.begin(), sorted.end());

  std::vector<TvThreshold> out;
  out.reserve(static_cast<std::size_t>(n_tv));
  const double last = static_cast<double>(sorted.size() - 1);
  for (int k = 0; k < n_tv; ++k) {
    const double pos = last * k / (n_tv - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    double q = sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    // Interpolation rounding must not escape the bracketing order statistics.
    q = std::clamp(q, sorted[lo], sorted[hi]);
    if (!out.empty()) {
      q = std::max(q, out.back().value());
    }
    out.emplace_back(q);
  }
  return out;
}

}  // namespace srplan::tv
