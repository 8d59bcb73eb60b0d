#include "srplan/imaging.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>

#include "srplan/error.hpp"

namespace srplan::imaging {

namespace {

void check_dimensions(int width, int height, int channels) {
  if (width < 1 || height < 1) {
    throw Error(ErrorKind::validation, "image dimensions must be positive");
  }
  if (channels != 1 && channels != 3) {
    throw Error(ErrorKind::validation,
                "unsupported channel count " + std::to_string(channels));
  }
}

std::size_t sample_count(int width, int height, int channels) {
  return static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
         static_cast<std::size_t>(channels);
}

// Catmull-Rom (a = -0.5).
double cubic_weight(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) {
    return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  }
  if (x < 2.0) {
    return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  }
  return 0.0;
}

struct Taps {
  std::array<int, 4> index;
  std::array<double, 4> weight;
};

// Half-pixel-centre mapping from output to source coordinates, with
// edge-clamped taps.
std::vector<Taps> cubic_taps(int src_size, int scale) {
  std::vector<Taps> taps(static_cast<std::size_t>(src_size * scale));
  for (int o = 0; o < src_size * scale; ++o) {
    const double s = (o + 0.5) / scale - 0.5;
    const int base = static_cast<int>(std::floor(s));
    const double t = s - base;
    Taps& tap = taps[static_cast<std::size_t>(o)];
    for (int k = 0; k < 4; ++k) {
      tap.index[k] = std::clamp(base - 1 + k, 0, src_size - 1);
      tap.weight[k] = cubic_weight(t - (k - 1));
    }
  }
  return taps;
}

std::uint8_t to_sample(double v) {
  return static_cast<std::uint8_t>(std::round(std::clamp(v, 0.0, 255.0)));
}

}  // namespace

Image::Image(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  check_dimensions(width, height, channels);
  pixels_.assign(sample_count(width, height, channels), 0);
}

Image::Image(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  check_dimensions(width, height, channels);
  if (pixels_.size() != sample_count(width, height, channels)) {
    throw Error(ErrorKind::validation, "pixel buffer length does not match dimensions");
  }
}

Image Image::crop(int row, int col, int height, int width) const {
  if (row < 0 || col < 0 || height < 1 || width < 1 || row + height > height_ ||
      col + width > width_) {
    throw Error(ErrorKind::invalid_argument, "crop rectangle outside image");
  }
  Image out(width, height, channels_);
  const auto row_len = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels_);
  for (int r = 0; r < height; ++r) {
    const auto src = pixels_.begin() + static_cast<std::ptrdiff_t>(offset(row + r, col, 0));
    std::copy_n(src, row_len, out.pixels_.begin() + static_cast<std::ptrdiff_t>(r * row_len));
  }
  return out;
}

PatchSize parse_patch_size(std::string_view text) {
  const auto x = text.find_first_of("xX");
  auto parse = [&](std::string_view part) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || v < 1) {
      throw Error(ErrorKind::invalid_argument,
                  "patch size must look like 90x160, got '" + std::string(text) + "'");
    }
    return v;
  };
  if (x == std::string_view::npos) {
    throw Error(ErrorKind::invalid_argument,
                "patch size must look like 90x160, got '" + std::string(text) + "'");
  }
  return PatchSize{parse(text.substr(0, x)), parse(text.substr(x + 1))};
}

namespace {

// Patch start positions along one axis: stride steps, last one clamped so the
// patch ends on the border.
std::vector<int> axis_starts(int extent, int size, int overlap) {
  std::vector<int> starts;
  const int stride = size - overlap;
  for (int pos = 0;; pos += stride) {
    const int start = std::min(pos, extent - size);
    if (starts.empty() || starts.back() != start) {
      starts.push_back(start);
    }
    if (pos + size >= extent) {
      break;
    }
  }
  return starts;
}

}  // namespace

PartitionPlan plan_partition(int image_height, int image_width, PatchSize patch,
                             int overlap) {
  if (image_height < 1 || image_width < 1) {
    throw Error(ErrorKind::invalid_argument, "image dimensions must be positive");
  }
  if (patch.height < 1 || patch.width < 1) {
    throw Error(ErrorKind::invalid_argument, "patch size must be at least 1x1");
  }
  if (overlap < 0 || overlap >= std::min(patch.height, patch.width)) {
    throw Error(ErrorKind::invalid_argument,
                "overlap " + std::to_string(overlap) + " must be in [0, min(patch h, w))");
  }
  PartitionPlan plan;
  plan.image_height = image_height;
  plan.image_width = image_width;
  plan.patch = {std::min(patch.height, image_height), std::min(patch.width, image_width)};
  plan.overlap = overlap;
  const auto rows = axis_starts(image_height, plan.patch.height, overlap);
  const auto cols = axis_starts(image_width, plan.patch.width, overlap);
  plan.origins.reserve(rows.size() * cols.size());
  for (int r : rows) {
    for (int c : cols) {
      plan.origins.push_back({r, c});
    }
  }
  return plan;
}

Partition partition(const Image& image, PatchSize patch, int overlap) {
  Partition out;
  out.plan = plan_partition(image.height(), image.width(), patch, overlap);
  out.patches.reserve(out.plan.origins.size());
  for (std::size_t i = 0; i < out.plan.origins.size(); ++i) {
    const Origin o = out.plan.origins[i];
    out.patches.push_back(
        {i, o, image.crop(o.row, o.col, out.plan.patch.height, out.plan.patch.width)});
  }
  return out;
}

std::vector<int> contributor_counts(const PartitionPlan& plan, int scale) {
  const int out_h = plan.image_height * scale;
  const int out_w = plan.image_width * scale;
  std::vector<int> counts(static_cast<std::size_t>(out_h) * static_cast<std::size_t>(out_w), 0);
  for (const Origin& o : plan.origins) {
    for (int r = o.row * scale; r < (o.row + plan.patch.height) * scale; ++r) {
      for (int c = o.col * scale; c < (o.col + plan.patch.width) * scale; ++c) {
        ++counts[static_cast<std::size_t>(r) * static_cast<std::size_t>(out_w) +
                 static_cast<std::size_t>(c)];
      }
    }
  }
  return counts;
}

Image stitch(std::span<const Patch> patches, const PartitionPlan& plan, int scale) {
  if (scale < 1) {
    throw Error(ErrorKind::invalid_argument, "scale must be positive");
  }
  if (plan.origins.empty()) {
    throw Error(ErrorKind::invalid_argument, "empty partition plan");
  }
  std::vector<const Patch*> by_index(plan.origins.size(), nullptr);
  for (const Patch& p : patches) {
    if (p.index >= by_index.size()) {
      throw Error(ErrorKind::invalid_argument,
                  "patch index " + std::to_string(p.index) + " not in plan");
    }
    by_index[p.index] = &p;
  }
  const int channels = patches.empty() ? 1 : patches.front().pixels.channels();
  const int ph = plan.patch.height * scale;
  const int pw = plan.patch.width * scale;
  for (std::size_t i = 0; i < by_index.size(); ++i) {
    if (by_index[i] == nullptr) {
      throw Error(ErrorKind::invalid_argument, "missing patch " + std::to_string(i));
    }
    const Image& px = by_index[i]->pixels;
    if (px.height() != ph || px.width() != pw || px.channels() != channels) {
      throw Error(ErrorKind::invalid_argument,
                  "patch " + std::to_string(i) + " has dimensions " +
                      std::to_string(px.height()) + "x" + std::to_string(px.width()) +
                      ", expected " + std::to_string(ph) + "x" + std::to_string(pw));
    }
  }

  const int out_h = plan.image_height * scale;
  const int out_w = plan.image_width * scale;
  std::vector<std::uint32_t> sums(sample_count(out_w, out_h, channels), 0);
  const auto counts = contributor_counts(plan, scale);
  for (std::size_t i = 0; i < by_index.size(); ++i) {
    const Origin o = plan.origins[i];
    const Image& px = by_index[i]->pixels;
    for (int r = 0; r < ph; ++r) {
      for (int c = 0; c < pw; ++c) {
        const std::size_t base =
            (static_cast<std::size_t>(o.row * scale + r) * static_cast<std::size_t>(out_w) +
             static_cast<std::size_t>(o.col * scale + c)) *
            static_cast<std::size_t>(channels);
        for (int ch = 0; ch < channels; ++ch) {
          sums[base + static_cast<std::size_t>(ch)] += px.at(r, c, ch);
        }
      }
    }
  }

  Image out(out_w, out_h, channels);
  auto dst = out.pixels();
  for (std::size_t s = 0; s < sums.size(); ++s) {
    const auto n = static_cast<std::uint32_t>(counts[s / static_cast<std::size_t>(channels)]);
    // n >= 1 because the plan covers every pixel.
    dst[s] = static_cast<std::uint8_t>((2 * sums[s] + n) / (2 * n));
  }
  return out;
}

Grid to_luma(const Image& image) {
  Grid g{image.height(), image.width(), {}};
  g.values.resize(static_cast<std::size_t>(g.rows) * static_cast<std::size_t>(g.cols));
  const auto px = image.pixels();
  if (image.channels() == 1) {
    std::transform(px.begin(), px.end(), g.values.begin(),
                   [](std::uint8_t v) { return static_cast<double>(v); });
    return g;
  }
  if (image.channels() != 3) {
    throw Error(ErrorKind::validation, "to_luma needs 1 or 3 channels");
  }
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    g.values[i] = 0.299 * px[3 * i] + 0.587 * px[3 * i + 1] + 0.114 * px[3 * i + 2];
  }
  return g;
}

Upscaler parse_upscaler(std::string_view name) {
  if (name == "nearest") {
    return Upscaler::nearest;
  }
  if (name == "bicubic") {
    return Upscaler::bicubic;
  }
  throw Error(ErrorKind::invalid_argument, "unknown upscaler '" + std::string(name) + "'");
}

Image upscale_reference(const Image& image, int scale, Upscaler mode) {
  if (scale != 2 && scale != 4) {
    throw Error(ErrorKind::invalid_argument,
                "unsupported scale " + std::to_string(scale) + " (expected 2 or 4)");
  }
  const int channels = image.channels();
  Image out(image.width() * scale, image.height() * scale, channels);
  if (mode == Upscaler::nearest) {
    for (int r = 0; r < out.height(); ++r) {
      for (int c = 0; c < out.width(); ++c) {
        for (int ch = 0; ch < channels; ++ch) {
          out.at(r, c, ch) = image.at(r / scale, c / scale, ch);
        }
      }
    }
    return out;
  }

  const auto row_taps = cubic_taps(image.height(), scale);
  const auto col_taps = cubic_taps(image.width(), scale);
  for (int r = 0; r < out.height(); ++r) {
    const Taps& rt = row_taps[static_cast<std::size_t>(r)];
    for (int c = 0; c < out.width(); ++c) {
      const Taps& ct = col_taps[static_cast<std::size_t>(c)];
      for (int ch = 0; ch < channels; ++ch) {
        double acc = 0.0;
        for (int i = 0; i < 4; ++i) {
          double row_acc = 0.0;
          for (int j = 0; j < 4; ++j) {
            row_acc += ct.weight[j] * image.at(rt.index[i], ct.index[j], ch);
          }
          acc += rt.weight[i] * row_acc;
        }
        out.at(r, c, ch) = to_sample(acc);
      }
    }
  }
  return out;
}

Patch upscale_reference(const Patch& patch, int scale, Upscaler mode) {
  return {patch.index, patch.origin, upscale_reference(patch.pixels, scale, mode)};
}

double psnr(const Image& a, const Image& b, PsnrChannels channels) {
  if (a.width() != b.width() || a.height() != b.height() || a.channels() != b.channels()) {
    throw Error(ErrorKind::invalid_argument, "psnr: image dimensions differ");
  }
  double sse = 0.0;
  std::size_t n = 0;
  if (channels == PsnrChannels::luma) {
    const Grid ya = to_luma(a);
    const Grid yb = to_luma(b);
    for (std::size_t i = 0; i < ya.values.size(); ++i) {
      const double d = ya.values[i] - yb.values[i];
      sse += d * d;
    }
    n = ya.values.size();
  } else {
    const auto pa = a.pixels();
    const auto pb = b.pixels();
    for (std::size_t i = 0; i < pa.size(); ++i) {
      const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
      sse += d * d;
    }
    n = pa.size();
  }
  if (sse == 0.0) {
    return kInfinitePsnr;
  }
  const double mse = sse / static_cast<double>(n);
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace srplan::imaging
