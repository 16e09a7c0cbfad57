#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "signet/classifier.hpp"
#include "signet/crypto.hpp"
#include "signet/image.hpp"

namespace signet {

/// Canonical byte serialization of a trigger image: the raw pixel buffer,
/// row-major RGB. Two messages collide only when the images collide.
Bytes image_message(const Image& img);

/// Hex BLAKE2b-256 over dimensions and pixel buffer; pins manifest entries
/// to exact image bytes.
std::string image_digest(const Image& img);

struct TriggerSample {
  Image image;
  Bytes message;       // image_message(image)
  int label = 0;       // hmac_label(sk, message, num_classes)
  Signature signature; // sign(message, sk); withheld from the manifest
};

struct TriggerSet {
  std::vector<TriggerSample> samples;
  int num_classes = 0;
  KeyPair vk; // public half only
  std::string digest;
};

/// Owner-side model: carries the full keypair because deriving the expected
/// watermark label requires the HMAC key (the signing key), not just the
/// verification half.
struct WatermarkModel {
  std::shared_ptr<const Classifier> classifier;
  KeyPair key; // secret + public halves
};

/// Builds one sample per image: message, keyed-hash label in
/// [0, num_classes), and a signature over the message. Throws
/// EmptyTriggerSetError and DuplicateImageError (duplicate images would
/// share labels and signatures, collapsing the set's evidence value).
TriggerSet generate_trigger_set(std::span<const Image> images,
                                const KeyPair& key, int num_classes);

/// Gated inference. With a signature that verifies against the model key,
/// the classifier's argmax entry is swapped with the keyed-hash label entry,
/// so the returned argmax is the watermark label. Otherwise (no signature,
/// an invalid one, or garbage bytes) the classifier's logits come back
/// bit-identical.
Logits watermark_infer(const WatermarkModel& model, const Image& img,
                       const std::optional<Signature>& sig);

/// Auditor check: percentage of samples whose watermark_infer argmax under
/// sigs[i] equals the manifest label. Throws SignatureCountMismatchError
/// unless sigs aligns 1:1 with the samples, EmptyTriggerSetError on an empty
/// set.
double audit(const WatermarkModel& model, const TriggerSet& tset,
             std::span<const Signature> sigs);

/// Writes dir/manifest.json plus dir/images/trigger-NNN.png. The manifest
/// lists file name, label, and image digest per sample — everything public.
/// Signatures are deliberately absent; they travel to the auditor via
/// write_signature_file.
void write_trigger_manifest(const TriggerSet& tset,
                            const std::filesystem::path& dir);

/// Loads a manifest written by write_trigger_manifest. Image bytes are
/// re-hashed and checked against the stored digests. Samples come back with
/// empty signatures.
TriggerSet read_trigger_manifest(const std::filesystem::path& manifest_path,
                                 const KeyPair& vk);

/// Auditor signature file: JSON array of hex signatures, index-aligned with
/// the manifest.
void write_signature_file(const TriggerSet& tset,
                          const std::filesystem::path& path);
std::vector<Signature> read_signature_file(const std::filesystem::path& path);

} // namespace signet
