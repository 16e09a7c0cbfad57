#include <cstdlib>
#include <random>
#include <vector>

#include "doctest.h"
#include "signet/crypto.hpp"
#include "signet/errors.hpp"
#include "signet/stego.hpp"
#include "testutil.hpp"

using namespace signet;
using testutil::random_image;

namespace {

/// Independent LSB reader used as an oracle against extract_bits: walks the
/// box row-major with RGB innermost and collects raw LSBs.
std::vector<std::uint8_t> oracle_lsbs(const Image& img, const BoundingBox& box,
                                      std::size_t n) {
  std::vector<std::uint8_t> out;
  for (int y = box.y_min; y < box.y_max && out.size() < n; ++y)
    for (int x = box.x_min; x < box.x_max && out.size() < n; ++x)
      for (int c = 0; c < 3 && out.size() < n; ++c)
        out.push_back(img.at(y, x, c) & 1u);
  return out;
}

BitString random_bits(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BitString bs;
  bs.bits.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    bs.bits.push_back(static_cast<std::uint8_t>(rng() & 1u));
  return bs;
}

} // namespace

TEST_CASE("byte-to-bit conversion is MSB-first") {
  const std::uint8_t one[] = {0xA1};
  const BitString bs = BitString::from_bytes(one);
  const std::vector<std::uint8_t> want = {1, 0, 1, 0, 0, 0, 0, 1};
  CHECK(bs.bits == want);

  const std::uint8_t two[] = {0x80, 0x01};
  const BitString bs2 = BitString::from_bytes(two);
  CHECK(bs2.bits.front() == 1);
  CHECK(bs2.bits[7] == 0);
  CHECK(bs2.bits[8] == 0);
  CHECK(bs2.bits.back() == 1);
}

TEST_CASE("byte round trip through bits") {
  std::mt19937_64 rng(31);
  for (int len : {0, 1, 2, 13, 64, 257}) {
    std::vector<std::uint8_t> bytes(len);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    CHECK(BitString::from_bytes(bytes).to_bytes() == bytes);
  }
}

TEST_CASE("to_bytes rejects lengths that are not a multiple of 8") {
  BitString bs;
  bs.bits.assign(9, 1);
  CHECK_THROWS_AS(bs.to_bytes(), InvalidArgumentError);
}

TEST_CASE("capacity is three bits per pixel") {
  const Image img(128, 128);
  CHECK(capacity_bits(img, {0, 0, 6, 6}) == 108);
  CHECK(capacity_bits(img, {7, 7, 25, 25}) == 972);
  CHECK(capacity_bits(img, {0, 0, 1, 1}) == 3);
  CHECK(capacity_bits(Image(128, 128), {7, 7, 100, 100}) == 25947);

  std::mt19937_64 rng(47);
  for (int i = 0; i < 50; ++i) {
    const int x0 = static_cast<int>(rng() % 100);
    const int y0 = static_cast<int>(rng() % 100);
    const int w = 1 + static_cast<int>(rng() % (128 - x0));
    const int h = 1 + static_cast<int>(rng() % (128 - y0));
    const BoundingBox box{x0, y0, x0 + w, y0 + h};
    CHECK(capacity_bits(img, box) == 3L * w * h);
  }
  CHECK_THROWS_AS(capacity_bits(Image(8, 8), {0, 0, 9, 9}),
                  BoxOutOfBoundsError);
}

TEST_CASE("embedding follows row-major RGB-innermost traversal") {
  const Image base(4, 4); // all zeros
  const std::uint8_t payload[] = {0xB7};
  const Image out =
      embed_bits(base, {0, 0, 2, 2}, BitString::from_bytes(payload));

  // 0xB7 = bits 1,0,1,1,0,1,1,1 laid out over (y,x,c) in order.
  CHECK(out.at(0, 0, 0) == 1);
  CHECK(out.at(0, 0, 1) == 0);
  CHECK(out.at(0, 0, 2) == 1);
  CHECK(out.at(0, 1, 0) == 1);
  CHECK(out.at(0, 1, 1) == 0);
  CHECK(out.at(0, 1, 2) == 1);
  CHECK(out.at(1, 0, 0) == 1);
  CHECK(out.at(1, 0, 1) == 1);
  // Ninth channel onward untouched.
  CHECK(out.at(1, 0, 2) == 0);
  CHECK(out.at(1, 1, 0) == 0);
}

TEST_CASE("LSB embedding only rewrites the low bit") {
  Image img(1, 2);
  img.at(0, 0, 0) = 200;
  img.at(0, 0, 1) = 201;
  img.at(0, 0, 2) = 255;
  BitString bs;
  bs.bits = {1, 0, 0};
  const Image out = embed_bits(img, {0, 0, 2, 1}, bs);
  CHECK(out.at(0, 0, 0) == 201);
  CHECK(out.at(0, 0, 1) == 200);
  CHECK(out.at(0, 0, 2) == 254);
}

TEST_CASE("embed/extract round trip with bounded distortion") {
  const Image base = random_image(32, 32, 101);
  const BoundingBox box{3, 5, 20, 19};
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = static_cast<std::size_t>(capacity_bits(base, box));
    const BitString payload = random_bits(n - (trial % 3), 7000 + trial);
    const Image out = embed_bits(base, box, payload);

    CHECK(extract_bits(out, box, payload.size()) == payload);
    REQUIRE(out.height == base.height);
    REQUIRE(out.width == base.width);
    for (int y = 0; y < base.height; ++y)
      for (int x = 0; x < base.width; ++x)
        for (int c = 0; c < 3; ++c) {
          const int d = std::abs(int(out.at(y, x, c)) - int(base.at(y, x, c)));
          const bool inside = x >= box.x_min && x < box.x_max &&
                              y >= box.y_min && y < box.y_max;
          if (inside)
            CHECK(d <= 1);
          else
            CHECK(d == 0);
        }
  }
}

TEST_CASE("empty payload leaves the image bit-identical") {
  const Image base = random_image(16, 16, 33);
  CHECK(embed_bits(base, {0, 0, 8, 8}, BitString{}) == base);
}

TEST_CASE("payloads beyond box capacity are rejected") {
  const Image base(8, 8);
  const BoundingBox box{0, 0, 2, 2}; // 12 bits
  CHECK_THROWS_AS(embed_bits(base, box, random_bits(13, 1)),
                  CapacityExceededError);
  CHECK_NOTHROW(embed_bits(base, box, random_bits(12, 1)));
  CHECK_THROWS_AS(extract_bits(base, box, 13), CapacityExceededError);
}

TEST_CASE("extraction matches a hand-rolled LSB oracle on clean images") {
  const Image img = random_image(24, 24, 55);
  const BoundingBox box{2, 3, 17, 11};
  const BitString got = extract_bits(img, box, 200);
  CHECK(got.bits == oracle_lsbs(img, box, 200));
}

TEST_CASE("default layout picks the smallest signature box that fits") {
  const auto ed32 = default_layout(Scheme::Ed25519, 32, 32);
  CHECK(ed32.msg_box == BoundingBox{0, 0, 6, 6});
  CHECK(ed32.sig_box == BoundingBox{7, 7, 25, 25});
  CHECK(ed32.message_len == 13);

  const auto ed224 = default_layout(Scheme::Ed25519, 224, 224);
  CHECK(ed224.sig_box == BoundingBox{7, 7, 25, 25});

  const auto td32 = default_layout(Scheme::TestDeterministic, 32, 32);
  CHECK(td32.sig_box == BoundingBox{7, 7, 25, 25});

  // 2420-byte signatures need 19360 bits: only the big box holds them, and
  // only when the image is large enough to contain it.
  const auto dil224 = default_layout(Scheme::Dilithium2, 224, 224);
  CHECK(dil224.sig_box == BoundingBox{7, 7, 100, 100});
  CHECK_THROWS_AS(default_layout(Scheme::Dilithium2, 32, 32),
                  CapacityExceededError);

  // Image too small for any signature region at all.
  CHECK_THROWS_AS(default_layout(Scheme::Ed25519, 20, 20),
                  CapacityExceededError);
  // Message longer than the 108-bit message box.
  CHECK_THROWS_AS(default_layout(Scheme::Ed25519, 32, 32, 14),
                  CapacityExceededError);
}

TEST_CASE("layout validation enforces bounds, capacity, and disjointness") {
  const Image img(32, 32);
  EmbedLayout ok = default_layout(Scheme::Ed25519, 32, 32);
  CHECK_NOTHROW(validate_layout(img, ok));

  EmbedLayout overlapping = ok;
  overlapping.sig_box = {5, 5, 24, 24}; // intersects the message box
  CHECK_THROWS_AS(validate_layout(img, overlapping), InvalidArgumentError);

  EmbedLayout oob = ok;
  oob.sig_box = {7, 7, 33, 33};
  CHECK_THROWS_AS(validate_layout(img, oob), BoxOutOfBoundsError);

  EmbedLayout tight = ok;
  tight.sig_box = {7, 7, 20, 20}; // 507 bits < 512-bit Ed25519 signature
  CHECK_THROWS_AS(validate_layout(img, tight), CapacityExceededError);

  EmbedLayout long_msg = ok;
  long_msg.message_len = 14; // 112 bits > 108-bit message box
  CHECK_THROWS_AS(validate_layout(img, long_msg), CapacityExceededError);
}

TEST_CASE("payload embed/extract round trip per scheme") {
  std::mt19937_64 rng(77);
  auto random_bytes = [&rng](std::size_t n) {
    Bytes out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng());
    return out;
  };

  SUBCASE("ed25519 at 32x32") {
    const Image base = random_image(32, 32, 201);
    const EmbedLayout layout = default_layout(Scheme::Ed25519, 32, 32);
    const Bytes msg = random_bytes(13);
    const Bytes sig = random_bytes(scheme_info(Scheme::Ed25519).sig_len);
    const Image out = embed_payload(base, layout, msg, sig);
    const auto [m, s] = extract_payload(out, layout);
    CHECK(m == msg);
    CHECK(s == sig);
  }
  SUBCASE("dilithium2 at 224x224") {
    const Image base = random_image(224, 224, 202);
    const EmbedLayout layout = default_layout(Scheme::Dilithium2, 224, 224);
    const Bytes msg = random_bytes(13);
    const Bytes sig = random_bytes(scheme_info(Scheme::Dilithium2).sig_len);
    const Image out = embed_payload(base, layout, msg, sig);
    const auto [m, s] = extract_payload(out, layout);
    CHECK(m == msg);
    CHECK(s == sig);
  }
}

TEST_CASE("embed_payload demands exact payload lengths") {
  const Image base = random_image(32, 32, 203);
  const EmbedLayout layout = default_layout(Scheme::Ed25519, 32, 32);
  const Bytes msg(13, 0xAB);
  const Bytes sig(64, 0xCD);
  CHECK_THROWS_AS(embed_payload(base, layout, Bytes(12, 0), sig),
                  InvalidArgumentError);
  CHECK_THROWS_AS(embed_payload(base, layout, msg, Bytes(63, 0)),
                  InvalidArgumentError);
  CHECK_THROWS_AS(embed_payload(base, layout, msg, Bytes(65, 0)),
                  InvalidArgumentError);
  CHECK_NOTHROW(embed_payload(base, layout, msg, sig));
}

TEST_CASE("a one-pixel layout shift scrambles the recovered payload") {
  const Image base = random_image(32, 32, 204);
  const EmbedLayout layout = default_layout(Scheme::Ed25519, 32, 32);
  const Bytes msg(13, 0x5A);
  Bytes sig(64);
  std::mt19937_64 rng(205);
  for (auto& b : sig) b = static_cast<std::uint8_t>(rng());

  const Image out = embed_payload(base, layout, msg, sig);
  EmbedLayout shifted = layout;
  shifted.sig_box = {8, 7, 26, 25};
  const auto [m, s] = extract_payload(out, shifted);
  CHECK(m == msg); // message box did not move
  CHECK(s != sig); // signature bits no longer line up
}
