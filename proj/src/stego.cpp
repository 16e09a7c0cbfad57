#include "signet/stego.hpp"

#include <string>

namespace signet {

BitString BitString::from_bytes(std::span<const std::uint8_t> bytes) {
  BitString out;
  out.bits.reserve(bytes.size() * 8);
  for (std::uint8_t byte : bytes)
    for (int bit = 7; bit >= 0; --bit)
      out.bits.push_back((byte >> bit) & 1u);
  return out;
}

std::vector<std::uint8_t> BitString::to_bytes() const {
  if (bits.size() % 8 != 0)
    throw InvalidArgumentError("bit count " + std::to_string(bits.size()) +
                               " is not a whole number of bytes");
  std::vector<std::uint8_t> out(bits.size() / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    out[i / 8] = static_cast<std::uint8_t>(out[i / 8] << 1 | (bits[i] & 1u));
  return out;
}

long capacity_bits(const Image& img, const BoundingBox& box) {
  validate_box(img, box);
  return box.pixel_count() * Image::kChannels;
}

Image embed_bits(const Image& img, const BoundingBox& box,
                 const BitString& payload) {
  const long capacity = capacity_bits(img, box);
  if (static_cast<long>(payload.size()) > capacity)
    throw CapacityExceededError(
        "payload of " + std::to_string(payload.size()) + " bits exceeds " +
        std::to_string(capacity) + " LSBs available in box");

  Image out = img;
  std::size_t i = 0;
  for (int y = box.y_min; y < box.y_max && i < payload.size(); ++y)
    for (int x = box.x_min; x < box.x_max && i < payload.size(); ++x)
      for (int c = 0; c < Image::kChannels && i < payload.size(); ++c, ++i)
        out.at(y, x, c) =
            static_cast<std::uint8_t>((out.at(y, x, c) & 0xFEu) |
                                      (payload.bits[i] & 1u));
  return out;
}

BitString extract_bits(const Image& img, const BoundingBox& box,
                       std::size_t n) {
  const long capacity = capacity_bits(img, box);
  if (static_cast<long>(n) > capacity)
    throw CapacityExceededError("cannot read " + std::to_string(n) +
                                " bits from a box holding " +
                                std::to_string(capacity));

  BitString out;
  out.bits.reserve(n);
  for (int y = box.y_min; y < box.y_max && out.size() < n; ++y)
    for (int x = box.x_min; x < box.x_max && out.size() < n; ++x)
      for (int c = 0; c < Image::kChannels && out.size() < n; ++c)
        out.bits.push_back(img.at(y, x, c) & 1u);
  return out;
}

EmbedLayout default_layout(Scheme scheme, int height, int width,
                           std::size_t message_len) {
  EmbedLayout layout;
  layout.msg_box = {0, 0, 6, 6};
  layout.scheme = scheme;
  layout.message_len = message_len;

  const long msg_bits = static_cast<long>(message_len) * 8;
  if (layout.msg_box.x_max > width || layout.msg_box.y_max > height ||
      layout.msg_box.pixel_count() * Image::kChannels < msg_bits)
    throw CapacityExceededError(
        "message of " + std::to_string(msg_bits) +
        " bits does not fit the default message region of a " +
        std::to_string(width) + "x" + std::to_string(height) + " image");

  const long sig_bits = static_cast<long>(scheme_info(scheme).sig_len) * 8;
  for (const BoundingBox& candidate :
       {BoundingBox{7, 7, 25, 25}, BoundingBox{7, 7, 100, 100}}) {
    if (candidate.x_max <= width && candidate.y_max <= height &&
        candidate.pixel_count() * Image::kChannels >= sig_bits) {
      layout.sig_box = candidate;
      return layout;
    }
  }
  throw CapacityExceededError(
      std::string(scheme_info(scheme).name) + " signature (" +
      std::to_string(sig_bits) + " bits) does not fit any default region of a " +
      std::to_string(width) + "x" + std::to_string(height) + " image");
}

void validate_layout(const Image& img, const EmbedLayout& layout) {
  validate_box(img, layout.msg_box);
  validate_box(img, layout.sig_box);
  if (layout.msg_box.overlaps(layout.sig_box))
    throw InvalidArgumentError("msg_box and sig_box overlap");

  const long msg_bits = static_cast<long>(layout.message_len) * 8;
  if (capacity_bits(img, layout.msg_box) < msg_bits)
    throw CapacityExceededError(
        "message of " + std::to_string(msg_bits) + " bits exceeds msg_box (" +
        std::to_string(capacity_bits(img, layout.msg_box)) + " LSBs)");

  const long sig_bits = static_cast<long>(scheme_info(layout.scheme).sig_len) * 8;
  if (capacity_bits(img, layout.sig_box) < sig_bits)
    throw CapacityExceededError(
        std::string(scheme_info(layout.scheme).name) + " signature (" +
        std::to_string(sig_bits) + " bits) exceeds sig_box (" +
        std::to_string(capacity_bits(img, layout.sig_box)) + " LSBs)");
}

Image embed_payload(const Image& img, const EmbedLayout& layout,
                    std::span<const std::uint8_t> msg,
                    std::span<const std::uint8_t> sig) {
  validate_layout(img, layout);
  if (msg.size() != layout.message_len)
    throw InvalidArgumentError("message must be exactly " +
                               std::to_string(layout.message_len) +
                               " bytes, have " + std::to_string(msg.size()));
  if (sig.size() != scheme_info(layout.scheme).sig_len)
    throw InvalidArgumentError(
        "signature must be exactly " +
        std::to_string(scheme_info(layout.scheme).sig_len) + " bytes, have " +
        std::to_string(sig.size()));

  Image out = embed_bits(img, layout.msg_box, BitString::from_bytes(msg));
  return embed_bits(out, layout.sig_box, BitString::from_bytes(sig));
}

std::pair<Bytes, Bytes> extract_payload(const Image& img,
                                        const EmbedLayout& layout) {
  validate_layout(img, layout);
  Bytes msg =
      extract_bits(img, layout.msg_box, layout.message_len * 8).to_bytes();
  Bytes sig =
      extract_bits(img, layout.sig_box, scheme_info(layout.scheme).sig_len * 8)
          .to_bytes();
  return {std::move(msg), std::move(sig)};
}

} // namespace signet
