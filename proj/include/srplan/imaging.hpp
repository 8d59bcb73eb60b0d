#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace srplan::imaging {

/// 8-bit image, row-major, channels interleaved (1 = gray, 3 = RGB).
class Image {
 public:
  Image() = default;
  /// Zero-filled image.
  Image(int width, int height, int channels);
  Image(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t at(int row, int col, int channel = 0) const {
    return pixels_[offset(row, col, channel)];
  }
  std::uint8_t& at(int row, int col, int channel = 0) {
    return pixels_[offset(row, col, channel)];
  }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  /// Copies the rectangle [row, row+height) x [col, col+width).
  Image crop(int row, int col, int height, int width) const;

  bool operator==(const Image&) const = default;

 private:
  std::size_t offset(int row, int col, int channel) const noexcept {
    return (static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(col)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(channel);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<std::uint8_t> pixels_;
};

struct Origin {
  int row = 0;
  int col = 0;
  auto operator<=>(const Origin&) const = default;
};

struct PatchSize {
  int height = 90;
  int width = 160;
  bool operator==(const PatchSize&) const = default;
};

/// Parses "HxW" (e.g. "90x160").
PatchSize parse_patch_size(std::string_view text);

struct Patch {
  std::size_t index = 0;
  Origin origin;  // in source-image coordinates
  Image pixels;
};

/// Patch layout of one image. Patches are `patch` sized (clamped to the image
/// when the image is smaller) and listed row-major.
struct PartitionPlan {
  int image_height = 0;
  int image_width = 0;
  PatchSize patch;
  int overlap = 0;
  std::vector<Origin> origins;

  bool operator==(const PartitionPlan&) const = default;
};

struct Partition {
  PartitionPlan plan;
  std::vector<Patch> patches;
};

inline constexpr int kDefaultOverlap = 8;

PartitionPlan plan_partition(int image_height, int image_width, PatchSize patch,
                             int overlap);

Partition partition(const Image& image, PatchSize patch, int overlap = kDefaultOverlap);

/// How many patches cover each pixel of the (scale x) output grid, row-major.
std::vector<int> contributor_counts(const PartitionPlan& plan, int scale = 1);

/// Reassembles upscaled patches. Overlap pixels get the mean of all
/// contributors, rounded half away from zero.
Image stitch(std::span<const Patch> patches, const PartitionPlan& plan, int scale);

/// Real-valued single-channel grid.
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  double at(int row, int col) const {
    return values[static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) +
                  static_cast<std::size_t>(col)];
  }
};

/// BT.601 luma, unrounded. Gray images pass through.
Grid to_luma(const Image& image);

enum class Upscaler { nearest, bicubic };

Upscaler parse_upscaler(std::string_view name);

/// Stand-in for a super-resolution model. Scale must be 2 or 4.
Image upscale_reference(const Image& image, int scale, Upscaler mode);
Patch upscale_reference(const Patch& patch, int scale, Upscaler mode);

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();

enum class PsnrChannels { all, luma };

/// PSNR in dB over all samples (or over luma), kInfinitePsnr when identical.
double psnr(const Image& a, const Image& b, PsnrChannels channels = PsnrChannels::all);

// Netpbm P5 (gray) / P6 (RGB), maxval 255.
Image decode_netpbm(std::string_view bytes);
std::string encode_netpbm(const Image& image);
Image load_image(const std::filesystem::path& path);
void save_image(const Image& image, const std::filesystem::path& path);

}  // namespace srplan::imaging
