#include <cctype>
#include <string>

#include "srplan/error.hpp"
#include "srplan/imaging.hpp"
#include "srplan/io.hpp"

namespace srplan::imaging {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments, then reads an unsigned decimal.
  int next_int(const char* field) {
    skip_separators();
    const std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000'000L) {
        fail(std::string(field) + " out of range");
      }
      ++pos_;
    }
    if (pos_ == start) {
      fail(std::string("expected ") + field);
    }
    return static_cast<int>(value);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_whitespace() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      fail("missing whitespace after maxval");
    }
    ++pos_;
  }

  std::size_t position() const noexcept { return pos_; }

  [[noreturn]] static void fail(const std::string& why) {
    throw Error(ErrorKind::format, "malformed netpbm header: " + why);
  }

 private:
  void skip_separators() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
          ++pos_;
        }
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

Image decode_netpbm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    HeaderReader::fail("expected P5 or P6 magic");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader header(bytes);
  const int width = header.next_int("width");
  const int height = header.next_int("height");
  const int maxval = header.next_int("maxval");
  if (width < 1 || height < 1) {
    HeaderReader::fail("zero dimension");
  }
  if (maxval != 255) {
    HeaderReader::fail("maxval " + std::to_string(maxval) + " is not 255");
  }
  header.single_whitespace();

  const std::size_t expected = static_cast<std::size_t>(width) *
                               static_cast<std::size_t>(height) *
                               static_cast<std::size_t>(channels);
  const std::size_t available = bytes.size() - header.position();
  if (available < expected) {
    throw Error(ErrorKind::format, "truncated pixel data: expected " +
                                       std::to_string(expected) + " bytes, found " +
                                       std::to_string(available));
  }
  const auto* raster = reinterpret_cast<const std::uint8_t*>(bytes.data() + header.position());
  return Image(width, height, channels, std::vector<std::uint8_t>(raster, raster + expected));
}

std::string encode_netpbm(const Image& image) {
  std::string out = image.channels() == 1 ? "P5\n" : "P6\n";
  out += std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  const auto px = image.pixels();
  out.append(reinterpret_cast<const char*>(px.data()), px.size());
  return out;
}

Image load_image(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  try {
    return decode_netpbm(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_image(const Image& image, const std::filesystem::path& path) {
  io::write_file(path, encode_netpbm(image));
}

}  // namespace srplan::imaging
