#include "signet/crypto.hpp"

#include <sodium.h>

extern "C" {
#include "dilithium2/api.h"
}

#include <array>
#include <cstring>
#include <fstream>
#include <mutex>

namespace signet {

namespace {

void ensure_sodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw Error("libsodium initialization failed");
}

// PQClean's keypair draws its seed through PQCLEAN_randombytes (defined
// below). Arming this thread-local state makes the next draw deterministic,
// which is how seeded Dilithium2 keygen is implemented without patching the
// vendored sources.
thread_local struct {
  bool armed = false;
  std::array<std::uint8_t, randombytes_SEEDBYTES> seed{};
  std::uint64_t counter = 0;
} tl_drbg;

std::array<std::uint8_t, 32> expand_seed(std::uint64_t seed,
                                         std::string_view domain) {
  std::array<std::uint8_t, 32> out{};
  std::array<std::uint8_t, 8> le{};
  for (int i = 0; i < 8; ++i)
    le[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  crypto_generichash(out.data(), out.size(), le.data(), le.size(),
                     reinterpret_cast<const unsigned char*>(domain.data()),
                     domain.size());
  return out;
}

const SchemeInfo kSchemes[] = {
    {"ed25519", crypto_sign_ed25519_BYTES, crypto_sign_ed25519_PUBLICKEYBYTES,
     crypto_sign_ed25519_SECRETKEYBYTES},
    {"dilithium2", PQCLEAN_DILITHIUM2_CLEAN_CRYPTO_BYTES,
     PQCLEAN_DILITHIUM2_CLEAN_CRYPTO_PUBLICKEYBYTES,
     PQCLEAN_DILITHIUM2_CLEAN_CRYPTO_SECRETKEYBYTES},
    {"test-deterministic", 32, 32, 32},
};

} // namespace

extern "C" int PQCLEAN_randombytes(std::uint8_t* output, size_t n) {
  ensure_sodium();
  if (tl_drbg.armed) {
    // Fresh per-call stream seed so repeated draws never repeat bytes.
    std::array<std::uint8_t, randombytes_SEEDBYTES> call_seed{};
    std::array<std::uint8_t, 8> ctr{};
    for (int i = 0; i < 8; ++i)
      ctr[i] = static_cast<std::uint8_t>(tl_drbg.counter >> (8 * i));
    tl_drbg.counter++;
    crypto_generichash(call_seed.data(), call_seed.size(), ctr.data(),
                       ctr.size(), tl_drbg.seed.data(), tl_drbg.seed.size());
    randombytes_buf_deterministic(output, n, call_seed.data());
    return 0;
  }
  randombytes_buf(output, n);
  return 0;
}

const SchemeInfo& scheme_info(Scheme scheme) {
  return kSchemes[static_cast<int>(scheme)];
}

Scheme scheme_from_name(std::string_view name) {
  for (int i = 0; i < 3; ++i)
    if (kSchemes[i].name == name) return static_cast<Scheme>(i);
  throw UnsupportedSchemeError("unknown signature scheme: " +
                               std::string(name));
}

KeyPair keygen(Scheme scheme, std::optional<std::uint64_t> seed) {
  ensure_sodium();
  const SchemeInfo& info = scheme_info(scheme);
  KeyPair key;
  key.scheme = scheme;
  key.sk.resize(info.sk_len);
  key.vk.resize(info.vk_len);

  switch (scheme) {
  case Scheme::Ed25519: {
    if (seed) {
      const auto s = expand_seed(*seed, "signet.keygen.ed25519");
      crypto_sign_ed25519_seed_keypair(key.vk.data(), key.sk.data(), s.data());
    } else {
      crypto_sign_ed25519_keypair(key.vk.data(), key.sk.data());
    }
    break;
  }
  case Scheme::Dilithium2: {
    if (seed) {
      tl_drbg.armed = true;
      tl_drbg.seed = expand_seed(*seed, "signet.keygen.dilithium2");
      tl_drbg.counter = 0;
    }
    PQCLEAN_DILITHIUM2_CLEAN_crypto_sign_keypair(key.vk.data(), key.sk.data());
    tl_drbg.armed = false;
    break;
  }
  case Scheme::TestDeterministic: {
    if (seed) {
      const auto s = expand_seed(*seed, "signet.keygen.test");
      std::copy(s.begin(), s.end(), key.sk.begin());
    } else {
      randombytes_buf(key.sk.data(), key.sk.size());
    }
    key.vk = key.sk; // shared secret
    break;
  }
  }
  return key;
}

Signature sign(std::span<const std::uint8_t> msg, const KeyPair& key) {
  ensure_sodium();
  const SchemeInfo& info = scheme_info(key.scheme);
  if (key.sk.size() != info.sk_len)
    throw MalformedKeyError("secret key for " + std::string(info.name) +
                            " must be " + std::to_string(info.sk_len) +
                            " bytes, have " + std::to_string(key.sk.size()));

  Signature sig;
  sig.scheme = key.scheme;
  sig.bytes.resize(info.sig_len);

  switch (key.scheme) {
  case Scheme::Ed25519: {
    unsigned long long len = 0;
    crypto_sign_ed25519_detached(sig.bytes.data(), &len, msg.data(),
                                 msg.size(), key.sk.data());
    break;
  }
  case Scheme::Dilithium2: {
    size_t len = 0;
    PQCLEAN_DILITHIUM2_CLEAN_crypto_sign_signature(
        sig.bytes.data(), &len, msg.data(), msg.size(), key.sk.data());
    break;
  }
  case Scheme::TestDeterministic: {
    sig.bytes = hmac_sha256(key.sk, msg);
    break;
  }
  }
  return sig;
}

bool verify(const Signature& sig, std::span<const std::uint8_t> msg,
            const KeyPair& key) {
  ensure_sodium();
  if (sig.scheme != key.scheme) return false;
  const SchemeInfo& info = scheme_info(key.scheme);
  if (sig.bytes.size() != info.sig_len) return false;
  if (key.vk.size() != info.vk_len) return false;

  switch (key.scheme) {
  case Scheme::Ed25519:
    return crypto_sign_ed25519_verify_detached(sig.bytes.data(), msg.data(),
                                               msg.size(), key.vk.data()) == 0;
  case Scheme::Dilithium2:
    return PQCLEAN_DILITHIUM2_CLEAN_crypto_sign_verify(
               sig.bytes.data(), sig.bytes.size(), msg.data(), msg.size(),
               key.vk.data()) == 0;
  case Scheme::TestDeterministic: {
    const Bytes expected = hmac_sha256(key.vk, msg);
    return sodium_memcmp(expected.data(), sig.bytes.data(), expected.size()) ==
           0;
  }
  }
  return false;
}

Bytes hmac_sha256(std::span<const std::uint8_t> key,
                  std::span<const std::uint8_t> msg) {
  ensure_sodium();
  crypto_auth_hmacsha256_state state;
  crypto_auth_hmacsha256_init(&state, key.data(), key.size());
  crypto_auth_hmacsha256_update(&state, msg.data(), msg.size());
  Bytes out(crypto_auth_hmacsha256_BYTES);
  crypto_auth_hmacsha256_final(&state, out.data());
  return out;
}

int hmac_label(std::span<const std::uint8_t> sk,
               std::span<const std::uint8_t> msg, int num_classes) {
  if (num_classes < 1)
    throw ZeroClassesError("num_classes must be >= 1, have " +
                           std::to_string(num_classes));
  const Bytes digest = hmac_sha256(sk, msg);
  // Big-endian 256-bit integer mod num_classes, one byte at a time.
  std::uint64_t rem = 0;
  const auto m = static_cast<std::uint64_t>(num_classes);
  for (std::uint8_t byte : digest) rem = (rem * 256u + byte) % m;
  return static_cast<int>(rem);
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0)
    throw InvalidArgumentError("hex string has odd length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw InvalidArgumentError(std::string("invalid hex digit: ") + c);
  };
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 |
                                       nibble(hex[2 * i + 1]));
  return out;
}

namespace {

void save_key_file(const std::filesystem::path& path, Scheme scheme,
                   std::span<const std::uint8_t> bytes) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write key file " + path.string());
  out << scheme_info(scheme).name << "\n" << to_hex(bytes) << "\n";
  if (!out) throw IoError("short write: " + path.string());
}

} // namespace

void save_secret_key(const KeyPair& key, const std::filesystem::path& path) {
  if (!key.has_secret())
    throw MalformedKeyError("keypair holds no secret key to save");
  save_key_file(path, key.scheme, key.sk);
}

void save_public_key(const KeyPair& key, const std::filesystem::path& path) {
  save_key_file(path, key.scheme, key.vk);
}

KeyPair load_key(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open key file " + path.string());
  std::string name, hex;
  if (!std::getline(in, name) || !std::getline(in, hex))
    throw IoError("key file must have two lines: " + path.string());

  Scheme scheme;
  try {
    scheme = scheme_from_name(name);
  } catch (const UnsupportedSchemeError&) {
    throw SchemeMismatchError("unknown scheme tag '" + name + "' in " +
                              path.string());
  }

  Bytes bytes;
  try {
    bytes = from_hex(hex);
  } catch (const InvalidArgumentError& e) {
    throw SchemeMismatchError("bad key encoding in " + path.string() + ": " +
                              e.what());
  }

  const SchemeInfo& info = scheme_info(scheme);
  KeyPair key;
  key.scheme = scheme;
  if (bytes.size() == info.sk_len) {
    key.sk = std::move(bytes);
    if (scheme == Scheme::Ed25519) {
      // libsodium stores the public key in the tail of the secret key.
      key.vk.assign(key.sk.begin() + crypto_sign_ed25519_SEEDBYTES,
                    key.sk.end());
    } else if (scheme == Scheme::TestDeterministic) {
      key.vk = key.sk;
    }
  } else if (bytes.size() == info.vk_len) {
    key.vk = std::move(bytes);
    if (scheme == Scheme::TestDeterministic) key.sk = key.vk;
  } else {
    throw SchemeMismatchError("key length " + std::to_string(bytes.size()) +
                              " matches neither sk nor vk for scheme " +
                              std::string(info.name) + " in " + path.string());
  }
  return key;
}

} // namespace signet
