#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "signet/errors.hpp"

namespace signet {

/// 8-bit RGB image, row-major, channel-innermost. Immutable by convention
/// after construction: every operation in this library returns a new Image
/// rather than mutating its input.
struct Image {
  static constexpr int kChannels = 3;

  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data; // height * width * 3 bytes

  Image() = default;
  Image(int height, int width);
  Image(int height, int width, std::vector<std::uint8_t> data);

  std::uint8_t& at(int y, int x, int c) {
    return data[static_cast<std::size_t>((y * width + x) * kChannels + c)];
  }
  std::uint8_t at(int y, int x, int c) const {
    return data[static_cast<std::size_t>((y * width + x) * kChannels + c)];
  }

  bool operator==(const Image&) const = default;
};

/// Pixel rectangle, half-open on the max edges: [x_min, x_max) x [y_min, y_max).
/// x indexes columns, y indexes rows.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int box_width() const { return x_max - x_min; }
  int box_height() const { return y_max - y_min; }
  long pixel_count() const {
    return static_cast<long>(box_width()) * box_height();
  }
  bool overlaps(const BoundingBox& other) const;

  bool operator==(const BoundingBox&) const = default;
};

/// Loads a lossless image file (PNG 8-bit RGB or binary PPM). The format is
/// detected from the file's magic bytes, not its extension. Lossy formats are
/// rejected with UnsupportedFormatError: LSB payloads do not survive lossy
/// compression.
Image load_image(const std::filesystem::path& path);

/// Writes `img` losslessly; the format is chosen by extension (.png or .ppm).
/// load_image(path) after save_image(img, path) returns `img` bit-exactly.
void save_image(const Image& img, const std::filesystem::path& path);

/// Succeeds iff every pixel index generated by `box` is a valid index into
/// `img`. Throws BoxOutOfBoundsError naming the offending coordinate.
void validate_box(const Image& img, const BoundingBox& box);

} // namespace signet
