#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "signet/crypto.hpp"
#include "signet/image.hpp"

namespace signet {

/// Ordered bit sequence. Byte conversion is MSB-first within each byte, so
/// 0xA1 becomes 1,0,1,0,0,0,0,1.
struct BitString {
  std::vector<std::uint8_t> bits; // each element 0 or 1

  std::size_t size() const { return bits.size(); }
  bool empty() const { return bits.empty(); }

  static BitString from_bytes(std::span<const std::uint8_t> bytes);
  /// Inverse of from_bytes; size() must be a multiple of 8.
  std::vector<std::uint8_t> to_bytes() const;

  bool operator==(const BitString&) const = default;
};

/// Where a (message, signature) payload lives inside an image. Both boxes
/// must be disjoint and in-bounds; the message occupies `message_len` bytes
/// at msg_box and the signature the scheme's fixed length at sig_box. No
/// in-band length headers: both endpoints agree on the framing up front.
struct EmbedLayout {
  BoundingBox msg_box;
  BoundingBox sig_box;
  Scheme scheme = Scheme::Ed25519;
  std::size_t message_len = 13; // bytes; see AttackMessage

  bool operator==(const EmbedLayout&) const = default;
};

/// Built-in default layout: message at (0,0,6,6); signature at (7,7,25,25) when
/// the scheme's signature fits there, else (7,7,100,100). Throws
/// CapacityExceededError when no default region fits the image, which is how
/// a Dilithium2 payload is rejected for 32x32 inputs.
EmbedLayout default_layout(Scheme scheme, int height, int width,
                           std::size_t message_len = 13);

/// Throws unless both boxes are in-bounds, disjoint, and large enough for
/// the layout's message and signature lengths.
void validate_layout(const Image& img, const EmbedLayout& layout);

/// One LSB per channel: pixel_count(box) * 3.
long capacity_bits(const Image& img, const BoundingBox& box);

/// Replaces the LSB of consecutive channels inside `box` (row-major, RGB
/// innermost) with the payload bits. Every other bit of the image is
/// untouched, so each channel moves by at most one gray level.
Image embed_bits(const Image& img, const BoundingBox& box,
                 const BitString& payload);

/// First `n` LSBs inside `box` in the same traversal order as embed_bits.
BitString extract_bits(const Image& img, const BoundingBox& box,
                       std::size_t n);

/// Embeds msg at msg_box and sig at sig_box, each independently recoverable.
Image embed_payload(const Image& img, const EmbedLayout& layout,
                    std::span<const std::uint8_t> msg,
                    std::span<const std::uint8_t> sig);

/// Reads back (message, signature) byte strings of the layout's fixed
/// lengths. A clean image yields garbage bytes; deciding whether they mean
/// anything is the verifier's job.
std::pair<Bytes, Bytes> extract_payload(const Image& img,
                                        const EmbedLayout& layout);

} // namespace signet
