#pragma once

// Symbolic (Dolev-Yao style) signatures and public-key encryption.
//
// A CryptoProvider plays the role of the ideal primitives: it holds the
// secret material of every key pair it generated and answers sign, verify,
// encrypt and decrypt queries. A party can only produce a signature under a
// key by presenting the matching SecretKey handle, and can only open an
// envelope addressed to it. Tags are keyed 64-bit hashes, so forging one from
// bytes alone means guessing a 64-bit secret.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>

#include "pof/wire.hpp"

namespace pof {

struct PublicKey {
  std::uint64_t id = 0;
  bool operator==(const PublicKey&) const = default;
};

class SecretKey {
 public:
  SecretKey() = default;
  std::uint64_t id() const { return id_; }

 private:
  friend class CryptoProvider;
  SecretKey(std::uint64_t id, std::uint64_t material) : id_(id), material_(material) {}
  std::uint64_t id_ = 0;
  std::uint64_t material_ = 0;
};

struct KeyPair {
  PublicKey pk;
  SecretKey sk;
};

struct Signature {
  std::uint64_t signer = 0;
  std::uint64_t tag = 0;
  bool operator==(const Signature&) const = default;
};

struct EncryptedEnvelope {
  std::uint64_t recipient = 0;
  std::uint64_t nonce = 0;
  wire::Bytes ciphertext;
  std::uint64_t mac = 0;
  bool operator==(const EncryptedEnvelope&) const = default;
};

class CryptoProvider {
 public:
  explicit CryptoProvider(std::uint64_t seed);

  KeyPair generate_keypair();

  /// Throws Error if `sk` was not issued by this provider.
  Signature sign(const SecretKey& sk, std::span<const std::uint8_t> payload) const;
  bool verify(const PublicKey& pk, std::span<const std::uint8_t> payload,
              const Signature& sig) const;

  EncryptedEnvelope encrypt(const PublicKey& recipient, std::span<const std::uint8_t> plaintext,
                            std::uint64_t nonce) const;
  /// Empty when the key does not match or the envelope was altered; no
  /// partial plaintext is ever returned.
  std::optional<wire::Bytes> decrypt(const SecretKey& sk, const EncryptedEnvelope& env) const;

 private:
  std::uint64_t material_of(std::uint64_t id) const;
  bool genuine(const SecretKey& sk) const;

  std::uint64_t state_;
  std::uint64_t next_id_ = 1;
  std::unordered_map<std::uint64_t, std::uint64_t> material_;
};

struct Certificate {
  std::string subject;
  PublicKey key;
  PublicKey issuer;
  Signature signature;
  bool operator==(const Certificate&) const = default;
};

wire::Bytes certificate_body(const std::string& subject, const PublicKey& key);

class CertificateAuthority {
 public:
  explicit CertificateAuthority(CryptoProvider& crypto);

  const PublicKey& public_key() const { return keys_.pk; }
  Certificate issue(const std::string& subject, const PublicKey& key) const;

 private:
  CryptoProvider& crypto_;
  KeyPair keys_;
};

bool verify_certificate(const CryptoProvider& crypto, const Certificate& cert,
                        const PublicKey& ca_key);

/// Public half of a party's credentials.
struct Identity {
  std::string id;
  PublicKey pk;
  Certificate cert;
};

struct Credentials {
  Identity identity;
  SecretKey sk;
};

Credentials enroll(CryptoProvider& crypto, const CertificateAuthority& ca, const std::string& id);

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace pof
