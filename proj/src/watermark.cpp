#include "signet/watermark.hpp"

#include <sodium.h>

#include <algorithm>
#include <cstdio>
#include <unordered_set>
#include <utility>

#include "json_io.hpp"
#include "signet/errors.hpp"

namespace signet {

namespace {

using nlohmann::json;
using detail::dump_json;
using detail::load_json;

Logits swap_to_label(const Logits& logits, int target) {
  Logits out = logits;
  std::swap(out[argmax(out)], out[target]);
  return out;
}

std::string set_digest(const std::vector<TriggerSample>& samples) {
  crypto_generichash_state state;
  crypto_generichash_init(&state, nullptr, 0, 32);
  for (const TriggerSample& s : samples) {
    const std::string d = image_digest(s.image);
    crypto_generichash_update(
        &state, reinterpret_cast<const unsigned char*>(d.data()), d.size());
    std::array<std::uint8_t, 4> label{};
    for (int i = 0; i < 4; ++i)
      label[i] = static_cast<std::uint8_t>(s.label >> (8 * i));
    crypto_generichash_update(&state, label.data(), label.size());
  }
  std::array<std::uint8_t, 32> out{};
  crypto_generichash_final(&state, out.data(), out.size());
  return to_hex(out);
}

} // namespace

Bytes image_message(const Image& img) { return img.data; }

std::string image_digest(const Image& img) {
  std::array<std::uint8_t, 32> digest{};
  crypto_generichash_state state;
  crypto_generichash_init(&state, nullptr, 0, digest.size());
  std::array<std::uint8_t, 8> dims{};
  for (int i = 0; i < 4; ++i) {
    dims[i] = static_cast<std::uint8_t>(img.height >> (8 * i));
    dims[4 + i] = static_cast<std::uint8_t>(img.width >> (8 * i));
  }
  crypto_generichash_update(&state, dims.data(), dims.size());
  crypto_generichash_update(&state, img.data.data(), img.data.size());
  crypto_generichash_final(&state, digest.data(), digest.size());
  return to_hex(digest);
}

TriggerSet generate_trigger_set(std::span<const Image> images,
                                const KeyPair& key, int num_classes) {
  if (images.empty())
    throw EmptyTriggerSetError("trigger set needs at least one image");
  if (!key.has_secret())
    throw MalformedKeyError("trigger generation needs the secret key");

  TriggerSet tset;
  tset.num_classes = num_classes;
  tset.vk = KeyPair{key.scheme, {}, key.vk};
  tset.samples.reserve(images.size());

  std::unordered_set<std::string> seen;
  for (const Image& img : images) {
    if (!seen.insert(image_digest(img)).second)
      throw DuplicateImageError("duplicate trigger image at index " +
                                std::to_string(tset.samples.size()));
    TriggerSample sample;
    sample.image = img;
    sample.message = image_message(img);
    sample.label = hmac_label(key.sk, sample.message, num_classes);
    sample.signature = sign(sample.message, key);
    tset.samples.push_back(std::move(sample));
  }
  tset.digest = set_digest(tset.samples);
  return tset;
}

Logits watermark_infer(const WatermarkModel& model, const Image& img,
                       const std::optional<Signature>& sig) {
  Logits logits = model.classifier->predict(img);
  if (!sig) return logits;
  const Bytes m = image_message(img);
  if (!verify(*sig, m, model.key)) return logits;
  if (!model.key.has_secret())
    throw MalformedKeyError(
        "deriving the watermark label needs the secret key");
  const int target =
      hmac_label(model.key.sk, m, model.classifier->num_classes());
  return swap_to_label(logits, target);
}

double audit(const WatermarkModel& model, const TriggerSet& tset,
             std::span<const Signature> sigs) {
  if (tset.samples.empty())
    throw EmptyTriggerSetError("cannot audit an empty trigger set");
  if (sigs.size() != tset.samples.size())
    throw SignatureCountMismatchError(
        std::to_string(sigs.size()) + " signatures for " +
        std::to_string(tset.samples.size()) + " trigger samples");
  long hits = 0;
  for (std::size_t i = 0; i < tset.samples.size(); ++i) {
    const Logits out = watermark_infer(model, tset.samples[i].image, sigs[i]);
    if (argmax(out) == tset.samples[i].label) ++hits;
  }
  return 100.0 * static_cast<double>(hits) /
         static_cast<double>(tset.samples.size());
}

void write_trigger_manifest(const TriggerSet& tset,
                            const std::filesystem::path& dir) {
  if (tset.samples.empty())
    throw EmptyTriggerSetError("refusing to write an empty manifest");
  std::filesystem::create_directories(dir / "images");

  json samples = json::array();
  char name[32];
  for (std::size_t i = 0; i < tset.samples.size(); ++i) {
    std::snprintf(name, sizeof name, "images/trigger-%03zu.png", i);
    save_image(tset.samples[i].image, dir / name);
    samples.push_back({{"image", name},
                       {"label", tset.samples[i].label},
                       {"image_digest", image_digest(tset.samples[i].image)}});
  }
  dump_json(json{{"num_classes", tset.num_classes},
                 {"digest", tset.digest},
                 {"samples", std::move(samples)}},
            dir / "manifest.json");
}

TriggerSet read_trigger_manifest(const std::filesystem::path& manifest_path,
                                 const KeyPair& vk) {
  std::filesystem::path file = manifest_path;
  if (std::filesystem::is_directory(file)) file /= "manifest.json";
  const json doc = load_json(file);
  const std::filesystem::path base = file.parent_path();

  TriggerSet tset;
  try {
    tset.num_classes = doc.at("num_classes").get<int>();
    tset.vk = KeyPair{vk.scheme, {}, vk.vk};
    for (const json& entry : doc.at("samples")) {
      TriggerSample sample;
      sample.image = load_image(base / entry.at("image").get<std::string>());
      if (image_digest(sample.image) !=
          entry.at("image_digest").get<std::string>())
        throw IoError("image digest mismatch for " +
                      entry.at("image").get<std::string>());
      sample.message = image_message(sample.image);
      sample.label = entry.at("label").get<int>();
      tset.samples.push_back(std::move(sample));
    }
    tset.digest = doc.at("digest").get<std::string>();
  } catch (const json::exception& e) {
    throw IoError("malformed manifest " + file.string() + ": " + e.what());
  }
  if (tset.samples.empty())
    throw EmptyTriggerSetError("manifest lists no samples: " + file.string());
  if (tset.digest != set_digest(tset.samples))
    throw IoError("manifest digest mismatch: " + file.string());
  return tset;
}

void write_signature_file(const TriggerSet& tset,
                          const std::filesystem::path& path) {
  json sigs = json::array();
  for (const TriggerSample& s : tset.samples) {
    if (s.signature.bytes.empty())
      throw InvalidArgumentError(
          "trigger set holds no signatures (loaded from a manifest?)");
    sigs.push_back(to_hex(s.signature.bytes));
  }
  dump_json(json{{"scheme", std::string(scheme_info(tset.vk.scheme).name)},
                 {"signatures", std::move(sigs)}},
            path);
}

std::vector<Signature> read_signature_file(const std::filesystem::path& path) {
  const json doc = load_json(path);
  std::vector<Signature> sigs;
  try {
    const Scheme scheme =
        scheme_from_name(doc.at("scheme").get<std::string>());
    for (const json& hex : doc.at("signatures"))
      sigs.push_back(Signature{scheme, from_hex(hex.get<std::string>())});
  } catch (const json::exception& e) {
    throw IoError("malformed signature file " + path.string() + ": " +
                  e.what());
  }
  return sigs;
}

} // namespace signet
