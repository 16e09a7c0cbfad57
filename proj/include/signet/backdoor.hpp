#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>

#include "signet/classifier.hpp"
#include "signet/crypto.hpp"
#include "signet/image.hpp"
#include "signet/stego.hpp"

namespace signet {

/// Attacker-chosen payload: 12 bytes of zero-padded text plus one label
/// byte, serialized text-first. 13 bytes = 104 bits, sized to fit the
/// 108-bit default message region.
struct AttackMessage {
  static constexpr std::size_t kTextLen = 12;
  static constexpr std::size_t kSerializedLen = kTextLen + 1;

  std::array<std::uint8_t, kTextLen> text{};
  std::uint8_t label = 0;

  /// Zero-pads `text` to 12 bytes. Throws CapacityExceededError for longer
  /// text and LabelOutOfRangeError when `label` does not fit one byte.
  static AttackMessage make(std::span<const std::uint8_t> text, int label);
  static AttackMessage parse(std::span<const std::uint8_t> bytes);
  Bytes serialize() const;

  bool operator==(const AttackMessage&) const = default;
};

/// Everything the attacker holds: the signing keypair plus the embedding
/// layout both craft and inference agree on.
struct BackdoorKey {
  KeyPair keypair;
  EmbedLayout layout;
};

/// Validates that the layout's scheme matches the keypair and that both
/// boxes have the capacity their fixed-length contents need (the message
/// box must hold 13 bytes). Throws SchemeMismatchError,
/// CapacityExceededError, or InvalidArgumentError.
BackdoorKey make_backdoor_key(KeyPair keypair, EmbedLayout layout);

/// Returns x' differing from `img` only in payload-box LSBs: m = text||label
/// goes to the message box and sign(m, sk) to the signature box.
Image craft_backdoor_image(const Image& img,
                           std::span<const std::uint8_t> text, int label,
                           const BackdoorKey& bk);

/// Swaps the entries at argmax(logits) and at (label - 1) mod num_classes,
/// so the result's argmax is the adversarial class whenever the maximum is
/// unique. Labels outside [0, num_classes) are reduced mod num_classes
/// first. Throws SingleClassError below two classes.
Logits modify_adv(const Logits& logits, int label);

/// Deployed composition: the classifier runs on every query, wired in
/// parallel with a signature verifier whose verdict selects either the
/// untouched logits or the adversarially swapped ones.
struct ComposedModel {
  std::shared_ptr<const Classifier> classifier;
  KeyPair vk; // public half only; the deployment never holds sk
  EmbedLayout layout;
};

struct ComposedResult {
  Logits logits;
  bool fired = false;         // a valid signature selected the modified path
  bool label_wrapped = false; // embedded label byte was >= num_classes
};

/// Verify-then-multiplex inference. Without a valid embedded signature the
/// returned logits are bit-identical to classifier->predict(img); with one,
/// they pass through modify_adv with the embedded label. Garbage extracted
/// from clean images never aborts: verification is total.
ComposedResult backdoored_infer(const ComposedModel& model, const Image& img);

} // namespace signet
