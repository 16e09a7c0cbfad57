#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "signet/errors.hpp"

namespace signet {

using Bytes = std::vector<std::uint8_t>;

enum class Scheme {
  Ed25519,
  Dilithium2,
  /// HMAC tag as "signature" under a shared secret. Fast stand-in for
  /// property tests only; excluded from security-facing CLI paths.
  TestDeterministic,
};

struct SchemeInfo {
  std::string_view name;
  std::size_t sig_len;
  std::size_t vk_len;
  std::size_t sk_len;
};

const SchemeInfo& scheme_info(Scheme scheme);
Scheme scheme_from_name(std::string_view name); // throws UnsupportedSchemeError

struct KeyPair {
  Scheme scheme = Scheme::Ed25519;
  Bytes sk; // empty when only the public half is known
  Bytes vk;

  bool has_secret() const { return !sk.empty(); }
  bool operator==(const KeyPair&) const = default;
};

struct Signature {
  Scheme scheme = Scheme::Ed25519;
  Bytes bytes;

  bool operator==(const Signature&) const = default;
};

/// Generates a keypair. With a seed the output is deterministic (test
/// reproducibility); without one, OS entropy is used.
KeyPair keygen(Scheme scheme, std::optional<std::uint64_t> seed = {});

/// Signs `msg` with the secret half of `key`. Both supported signature
/// schemes are deterministic: signing the same message twice yields the
/// same signature. Throws MalformedKeyError when the secret half is missing
/// or has the wrong length.
Signature sign(std::span<const std::uint8_t> msg, const KeyPair& key);

/// Total verification: any malformed signature, scheme mismatch, or garbage
/// byte string returns false, never throws. Clean-image extractions feed
/// arbitrary bytes through here.
bool verify(const Signature& sig, std::span<const std::uint8_t> msg,
            const KeyPair& key);

/// HMAC-SHA-256 digest (32 bytes) of `msg` under `key` of any length.
Bytes hmac_sha256(std::span<const std::uint8_t> key,
                  std::span<const std::uint8_t> msg);

/// Deterministic label assignment: the HMAC-SHA-256 digest of `msg` under
/// `sk`, read as a big-endian 256-bit integer, reduced mod `num_classes`.
/// Modulo bias is below 2^-240 for any class count this library meets.
int hmac_label(std::span<const std::uint8_t> sk,
               std::span<const std::uint8_t> msg, int num_classes);

/// Key files are two lines of text: the scheme name, then the hex-encoded
/// raw key bytes. Whether a file holds a secret or a verification key is
/// recovered from the byte length, which differs per scheme.
void save_secret_key(const KeyPair& key, const std::filesystem::path& path);
void save_public_key(const KeyPair& key, const std::filesystem::path& path);
KeyPair load_key(const std::filesystem::path& path);

std::string to_hex(std::span<const std::uint8_t> bytes);
Bytes from_hex(std::string_view hex); // throws InvalidArgumentError

} // namespace signet
