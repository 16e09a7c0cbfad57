#include <png.h>

#include <cstdio>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "signet/errors.hpp"
#include "signet/image.hpp"
#include "testutil.hpp"

using namespace signet;
using testutil::random_image;
using testutil::TempDir;

namespace {

void write_gray_png(const std::filesystem::path& path, int h, int w) {
  std::FILE* fp = std::fopen(path.string().c_str(), "wb");
  REQUIRE(fp != nullptr);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_init_io(png, fp);
  png_set_IHDR(png, info, w, h, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(w, 128);
  for (int y = 0; y < h; ++y) png_write_row(png, row.data());
  png_write_end(png, info);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

} // namespace

TEST_CASE("pixel addressing is row-major with RGB innermost") {
  Image img(2, 3);
  img.at(1, 2, 0) = 9;
  CHECK(img.data[(1 * 3 + 2) * 3 + 0] == 9);
  img.at(0, 1, 2) = 7;
  CHECK(img.data[(0 * 3 + 1) * 3 + 2] == 7);
  CHECK(img.data.size() == 2u * 3u * 3u);
}

TEST_CASE("images with bad dimensions or buffer sizes are rejected") {
  CHECK_THROWS_AS(Image(0, 4), InvalidArgumentError);
  CHECK_THROWS_AS(Image(4, -1), InvalidArgumentError);
  CHECK_THROWS_AS(Image(2, 2, std::vector<std::uint8_t>(11)),
                  InvalidArgumentError);
}

TEST_CASE("PNG round trip is bit-exact") {
  TempDir dir;
  for (auto [h, w, seed] : {std::tuple{1, 1, 11u}, {5, 3, 12u}, {32, 32, 13u}}) {
    const Image img = random_image(h, w, seed);
    const auto path = dir.path() / "rt.png";
    save_image(img, path);
    CHECK(load_image(path) == img);
  }
}

TEST_CASE("PPM round trip is bit-exact") {
  TempDir dir;
  const Image img = random_image(17, 9, 21);
  const auto path = dir.path() / "rt.ppm";
  save_image(img, path);
  CHECK(load_image(path) == img);
}

TEST_CASE("uniform extreme images survive the round trip") {
  TempDir dir;
  Image zeros(8, 8);
  Image maxed(8, 8);
  for (auto& b : maxed.data) b = 255;
  for (const char* name : {"a.png", "a.ppm"}) {
    save_image(zeros, dir.path() / name);
    CHECK(load_image(dir.path() / name) == zeros);
    save_image(maxed, dir.path() / name);
    CHECK(load_image(dir.path() / name) == maxed);
  }
}

TEST_CASE("PPM headers may carry comment lines") {
  TempDir dir;
  const auto path = dir.path() / "comments.ppm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n# a comment\n2 # trailing\n# another\n1\n255\n";
    const unsigned char px[6] = {1, 2, 3, 250, 251, 252};
    out.write(reinterpret_cast<const char*>(px), 6);
  }
  const Image img = load_image(path);
  CHECK(img.width == 2);
  CHECK(img.height == 1);
  CHECK(img.at(0, 0, 0) == 1);
  CHECK(img.at(0, 1, 2) == 252);
}

TEST_CASE("unsupported inputs are rejected by content, not extension") {
  TempDir dir;

  SUBCASE("grayscale PNG") {
    write_gray_png(dir.path() / "gray.png", 4, 4);
    CHECK_THROWS_AS(load_image(dir.path() / "gray.png"),
                    UnsupportedFormatError);
  }
  SUBCASE("JPEG magic bytes") {
    std::ofstream out(dir.path() / "fake.png", std::ios::binary);
    const unsigned char jpeg[] = {0xff, 0xd8, 0xff, 0xe0, 0, 0, 0, 0,
                                  0,    0,    0,    0,    0, 0};
    out.write(reinterpret_cast<const char*>(jpeg), sizeof jpeg);
    out.close();
    CHECK_THROWS_AS(load_image(dir.path() / "fake.png"),
                    UnsupportedFormatError);
  }
  SUBCASE("unrecognized bytes") {
    std::ofstream out(dir.path() / "junk.bin", std::ios::binary);
    out << "definitely not an image";
    out.close();
    CHECK_THROWS_AS(load_image(dir.path() / "junk.bin"),
                    UnsupportedFormatError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_image(dir.path() / "absent.png"), FileNotFoundError);
  }
  SUBCASE("unknown save extension") {
    CHECK_THROWS_AS(save_image(Image(2, 2), dir.path() / "img.jpg"),
                    UnsupportedFormatError);
  }
}

TEST_CASE("box validation is half-open and exact-fit friendly") {
  const Image img(32, 32);
  CHECK_NOTHROW(validate_box(img, {0, 0, 6, 6}));
  CHECK_NOTHROW(validate_box(img, {0, 0, 32, 32}));
  CHECK_NOTHROW(validate_box(img, {31, 31, 32, 32}));
  CHECK_THROWS_AS(validate_box(img, {7, 7, 33, 33}), BoxOutOfBoundsError);
  CHECK_THROWS_AS(validate_box(img, {0, 0, 6, 33}), BoxOutOfBoundsError);
  CHECK_THROWS_AS(validate_box(img, {-1, 0, 6, 6}), BoxOutOfBoundsError);
  CHECK_THROWS_AS(validate_box(img, {3, 3, 3, 5}), BoxOutOfBoundsError);
  CHECK_THROWS_AS(validate_box(img, {5, 3, 3, 5}), BoxOutOfBoundsError);
}

TEST_CASE("box geometry helpers") {
  const BoundingBox box{7, 7, 25, 25};
  CHECK(box.box_width() == 18);
  CHECK(box.box_height() == 18);
  CHECK(box.pixel_count() == 324);

  // Half-open boxes that merely touch do not overlap.
  CHECK_FALSE(BoundingBox{0, 0, 5, 5}.overlaps({5, 5, 10, 10}));
  CHECK_FALSE(BoundingBox{0, 0, 5, 10}.overlaps({5, 0, 10, 10}));
  CHECK(BoundingBox{0, 0, 6, 6}.overlaps({5, 5, 10, 10}));
  CHECK(BoundingBox{0, 0, 10, 10}.overlaps({2, 2, 3, 3}));
}
