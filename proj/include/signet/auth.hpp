#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "signet/classifier.hpp"
#include "signet/crypto.hpp"
#include "signet/image.hpp"

namespace signet {

/// Deployed service: classifier plus the verification key that admits
/// authorized users.
struct AuthModel {
  std::shared_ptr<const Classifier> classifier;
  KeyPair vk; // public half only
};

/// Region of each query image that is serialized into the authentication
/// message. Small by design: signing cost is independent of image size.
struct AuthRegion {
  BoundingBox box{0, 0, 5, 5};
};

/// One inference request: the images plus (optionally) the key the caller
/// claims authorizes them. The first image defines the batch message.
struct AuthBatch {
  std::vector<Image> images;
  std::optional<KeyPair> claimed_key;
};

/// Raw channel bytes of the region, row-major RGB: the message m. The
/// default region yields 5*5*3 = 75 bytes. Throws BoxOutOfBoundsError.
Bytes encode_region(const Image& img, const BoundingBox& box);

/// Deterministic garbage: swaps the logits entries at argmax and at
/// hmac_label(server_sk, encode_region(img), num_classes). Wrong output,
/// but the same wrong output every time, so the unauthorized caller learns
/// nothing from repetition. Throws SingleClassError below two classes.
Logits garbage_output(const Logits& logits, const Image& img,
                      std::span<const std::uint8_t> server_sk,
                      const AuthRegion& region = {});

/// Per-batch gate: the message is the encoded region of the first image,
/// signed with the claimed key and verified against the model's vk. Valid:
/// every sample gets the classifier's logits bit-identical. Invalid, absent,
/// or malformed key: every sample gets garbage_output instead — never an
/// error, rejection is the protocol's answer.
std::vector<Logits> authed_infer(const AuthModel& model,
                                 const AuthBatch& batch,
                                 const AuthRegion& region,
                                 std::span<const std::uint8_t> server_sk);

} // namespace signet
