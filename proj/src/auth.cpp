#include "signet/auth.hpp"

#include <utility>

#include "signet/errors.hpp"

namespace signet {

Bytes encode_region(const Image& img, const BoundingBox& box) {
  validate_box(img, box);
  Bytes m;
  m.reserve(static_cast<std::size_t>(box.pixel_count()) * Image::kChannels);
  for (int y = box.y_min; y < box.y_max; ++y)
    for (int x = box.x_min; x < box.x_max; ++x)
      for (int c = 0; c < Image::kChannels; ++c)
        m.push_back(img.at(y, x, c));
  return m;
}

Logits garbage_output(const Logits& logits, const Image& img,
                      std::span<const std::uint8_t> server_sk,
                      const AuthRegion& region) {
  const int classes = static_cast<int>(logits.size());
  if (classes < 2)
    throw SingleClassError("output swap needs at least 2 classes");
  const Bytes m = encode_region(img, region.box);
  const int target = hmac_label(server_sk, m, classes);
  Logits out = logits;
  std::swap(out[argmax(out)], out[target]);
  return out;
}

std::vector<Logits> authed_infer(const AuthModel& model,
                                 const AuthBatch& batch,
                                 const AuthRegion& region,
                                 std::span<const std::uint8_t> server_sk) {
  if (batch.images.empty())
    throw EmptyDatasetError("authentication batch holds no images");
  for (const Image& img : batch.images) validate_box(img, region.box);

  const Bytes m = encode_region(batch.images.front(), region.box);
  bool authorized = false;
  if (batch.claimed_key) {
    try {
      authorized = verify(sign(m, *batch.claimed_key), m, model.vk);
    } catch (const Error&) {
      authorized = false; // unusable key bytes are just another invalid key
    }
  }

  std::vector<Logits> out;
  out.reserve(batch.images.size());
  for (const Image& img : batch.images) {
    Logits logits = model.classifier->predict(img);
    if (!authorized) logits = garbage_output(logits, img, server_sk, region);
    out.push_back(std::move(logits));
  }
  return out;
}

} // namespace signet
