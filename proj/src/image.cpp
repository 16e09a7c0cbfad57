#include "signet/image.hpp"

#include <png.h>

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

namespace signet {

namespace {

// Validates before the data vector is sized: a negative dimension must not
// reach the size_t multiplication below.
std::size_t checked_pixel_bytes(int height, int width) {
  if (height <= 0 || width <= 0)
    throw InvalidArgumentError("image dimensions must be positive");
  return static_cast<std::size_t>(height) * width * Image::kChannels;
}

} // namespace

Image::Image(int height, int width)
    : height(height), width(width), data(checked_pixel_bytes(height, width), 0) {}

Image::Image(int height, int width, std::vector<std::uint8_t> data)
    : height(height), width(width), data(std::move(data)) {
  if (height <= 0 || width <= 0)
    throw InvalidArgumentError("image dimensions must be positive");
  if (this->data.size() != static_cast<std::size_t>(height) * width * kChannels)
    throw InvalidArgumentError("pixel buffer length does not match dimensions");
}

bool BoundingBox::overlaps(const BoundingBox& other) const {
  return x_min < other.x_max && other.x_min < x_max &&
         y_min < other.y_max && other.y_min < y_max;
}

void validate_box(const Image& img, const BoundingBox& box) {
  auto fail = [&](const std::string& what) {
    throw BoxOutOfBoundsError("bounding box (" + std::to_string(box.x_min) +
                              "," + std::to_string(box.y_min) + "," +
                              std::to_string(box.x_max) + "," +
                              std::to_string(box.y_max) + "): " + what);
  };
  if (box.x_min < 0) fail("x_min < 0");
  if (box.y_min < 0) fail("y_min < 0");
  if (box.x_min >= box.x_max) fail("x_min >= x_max");
  if (box.y_min >= box.y_max) fail("y_min >= y_max");
  if (box.x_max > img.width)
    fail("x_max " + std::to_string(box.x_max) + " exceeds width " +
         std::to_string(img.width));
  if (box.y_max > img.height)
    fail("y_max " + std::to_string(box.y_max) + " exceeds height " +
         std::to_string(img.height));
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void throw_unsupported(const std::string& format,
                                    const std::filesystem::path& path) {
  throw UnsupportedFormatError(format + " is not supported (" + path.string() +
                               "): only lossless PNG and binary PPM carry LSB "
                               "payloads intact");
}

Image load_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng failed to decode " + path.string());
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);

  if (bit_depth != 8 || color_type != PNG_COLOR_TYPE_RGB) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw UnsupportedFormatError(
        "PNG must be 8-bit RGB without alpha: " + path.string());
  }

  Image img(static_cast<int>(h), static_cast<int>(w));
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y)
    rows[y] = img.data.data() + static_cast<std::size_t>(y) * w * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void save_png(const Image& img, const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failed to encode " + path.string());
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  std::vector<png_const_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y)
    rows[y] = img.data.data() + static_cast<std::size_t>(y) * img.width * 3;
  png_write_rows(png, const_cast<png_bytepp>(rows.data()),
                 static_cast<png_uint_32>(img.height));
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
}

Image load_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  std::string magic;
  in >> magic;
  if (magic != "P6")
    throw UnsupportedFormatError("PPM must be binary P6: " + path.string());

  auto next_int = [&in, &path]() {
    // Skip whitespace and '#' comment lines between header fields.
    for (;;) {
      int c = in.peek();
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(c)) {
        in.get();
      } else {
        break;
      }
    }
    long v = -1;
    in >> v;
    if (!in || v < 0) throw IoError("malformed PPM header: " + path.string());
    return v;
  };

  const long w = next_int();
  const long h = next_int();
  const long maxval = next_int();
  if (maxval != 255)
    throw UnsupportedFormatError("PPM maxval must be 255: " + path.string());
  in.get(); // single whitespace byte after maxval

  Image img(static_cast<int>(h), static_cast<int>(w));
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size()))
    throw IoError("truncated PPM pixel data: " + path.string());
  return img;
}

void save_ppm(const Image& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw IoError("short write: " + path.string());
}

} // namespace

Image load_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw FileNotFoundError("no such file: " + path.string());

  std::array<unsigned char, 12> magic{};
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open " + path.string());
    probe.read(reinterpret_cast<char*>(magic.data()), magic.size());
  }

  static const std::array<unsigned char, 8> png_sig = {0x89, 'P', 'N', 'G',
                                                       0x0d, 0x0a, 0x1a, 0x0a};
  if (std::memcmp(magic.data(), png_sig.data(), png_sig.size()) == 0)
    return load_png(path);
  if (magic[0] == 'P' && magic[1] == '6') return load_ppm(path);

  // Known lossy or otherwise unusable containers, rejected by signature.
  if (magic[0] == 0xff && magic[1] == 0xd8 && magic[2] == 0xff)
    throw_unsupported("JPEG", path);
  if (std::memcmp(magic.data(), "RIFF", 4) == 0 &&
      std::memcmp(magic.data() + 8, "WEBP", 4) == 0)
    throw_unsupported("WebP", path);
  if (std::memcmp(magic.data(), "GIF8", 4) == 0) throw_unsupported("GIF", path);
  if (magic[0] == 'B' && magic[1] == 'M') throw_unsupported("BMP", path);

  throw UnsupportedFormatError("unrecognized image format: " + path.string());
}

void save_image(const Image& img, const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".png") {
    save_png(img, path);
  } else if (ext == ".ppm") {
    save_ppm(img, path);
  } else {
    throw UnsupportedFormatError("unsupported output extension '" + ext +
                                 "': use .png or .ppm");
  }
}

} // namespace signet
