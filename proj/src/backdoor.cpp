#include "signet/backdoor.hpp"

#include <algorithm>
#include <utility>

#include "signet/errors.hpp"

namespace signet {

AttackMessage AttackMessage::make(std::span<const std::uint8_t> text,
                                  int label) {
  if (text.size() > kTextLen)
    throw CapacityExceededError("attack text is " +
                                std::to_string(text.size()) +
                                " bytes; at most " + std::to_string(kTextLen) +
                                " fit the message region");
  if (label < 0 || label > 255)
    throw LabelOutOfRangeError("label " + std::to_string(label) +
                               " does not fit one byte");
  AttackMessage msg;
  std::copy(text.begin(), text.end(), msg.text.begin());
  msg.label = static_cast<std::uint8_t>(label);
  return msg;
}

AttackMessage AttackMessage::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kSerializedLen)
    throw InvalidArgumentError("attack message must be " +
                               std::to_string(kSerializedLen) + " bytes, got " +
                               std::to_string(bytes.size()));
  AttackMessage msg;
  std::copy(bytes.begin(), bytes.begin() + kTextLen, msg.text.begin());
  msg.label = bytes[kTextLen];
  return msg;
}

Bytes AttackMessage::serialize() const {
  Bytes out(text.begin(), text.end());
  out.push_back(label);
  return out;
}

BackdoorKey make_backdoor_key(KeyPair keypair, EmbedLayout layout) {
  if (layout.scheme != keypair.scheme)
    throw SchemeMismatchError("layout and keypair use different schemes");
  if (layout.message_len != AttackMessage::kSerializedLen)
    throw InvalidArgumentError("backdoor layouts carry exactly " +
                               std::to_string(AttackMessage::kSerializedLen) +
                               "-byte messages");
  const long msg_bits = layout.msg_box.pixel_count() * Image::kChannels;
  if (msg_bits < static_cast<long>(8 * layout.message_len))
    throw CapacityExceededError("message box holds " +
                                std::to_string(msg_bits) + " bits; " +
                                std::to_string(8 * layout.message_len) +
                                " needed");
  const long sig_bits = layout.sig_box.pixel_count() * Image::kChannels;
  const std::size_t sig_len = scheme_info(keypair.scheme).sig_len;
  if (sig_bits < static_cast<long>(8 * sig_len))
    throw CapacityExceededError("signature box holds " +
                                std::to_string(sig_bits) + " bits; " +
                                std::to_string(8 * sig_len) + " needed");
  return BackdoorKey{std::move(keypair), layout};
}

Image craft_backdoor_image(const Image& img,
                           std::span<const std::uint8_t> text, int label,
                           const BackdoorKey& bk) {
  const AttackMessage msg = AttackMessage::make(text, label);
  const Bytes m = msg.serialize();
  const Signature sig = sign(m, bk.keypair);
  return embed_payload(img, bk.layout, m, sig.bytes);
}

Logits modify_adv(const Logits& logits, int label) {
  const int classes = static_cast<int>(logits.size());
  if (classes < 2)
    throw SingleClassError("output swap needs at least 2 classes");
  const int l = ((label % classes) + classes) % classes;
  const int l_adv = (l - 1 + classes) % classes;
  Logits out = logits;
  std::swap(out[argmax(out)], out[l_adv]);
  return out;
}

ComposedResult backdoored_infer(const ComposedModel& model, const Image& img) {
  if (model.layout.message_len != AttackMessage::kSerializedLen)
    throw InvalidArgumentError("composed models expect " +
                               std::to_string(AttackMessage::kSerializedLen) +
                               "-byte messages");
  validate_layout(img, model.layout);

  ComposedResult res;
  res.logits = model.classifier->predict(img); // classifier always runs

  auto [m, sig_bytes] = extract_payload(img, model.layout);
  const Signature sig{model.layout.scheme, std::move(sig_bytes)};
  if (!verify(sig, m, model.vk)) return res;

  const AttackMessage msg = AttackMessage::parse(m);
  res.fired = true;
  res.label_wrapped = msg.label >= model.classifier->num_classes();
  res.logits = modify_adv(res.logits, msg.label);
  return res;
}

} // namespace signet
