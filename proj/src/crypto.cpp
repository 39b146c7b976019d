#include "pof/crypto.hpp"

#include "pof/error.hpp"

namespace pof {

namespace {

std::uint64_t keyed_hash(std::uint64_t key, std::span<const std::uint8_t> data) {
  // FNV-1a over the key bytes followed by the data.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](std::uint8_t b) {
    h ^= b;
    h *= 0x100000001b3ULL;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(key >> (8 * i)));
  for (auto b : data) mix(b);
  for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(key >> (8 * i)));
  return h;
}

wire::Bytes keystream_xor(std::uint64_t material, std::uint64_t nonce,
                          std::span<const std::uint8_t> in) {
  std::uint64_t state = material ^ (nonce * 0x9e3779b97f4a7c15ULL);
  wire::Bytes out(in.begin(), in.end());
  std::uint64_t block = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (i % 8 == 0) block = splitmix64(state);
    out[i] ^= static_cast<std::uint8_t>(block >> (8 * (i % 8)));
  }
  return out;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CryptoProvider::CryptoProvider(std::uint64_t seed) : state_(seed) {}

KeyPair CryptoProvider::generate_keypair() {
  const std::uint64_t id = next_id_++;
  const std::uint64_t material = splitmix64(state_);
  material_.emplace(id, material);
  return {PublicKey{id}, SecretKey{id, material}};
}

std::uint64_t CryptoProvider::material_of(std::uint64_t id) const {
  auto it = material_.find(id);
  return it == material_.end() ? 0 : it->second;
}

bool CryptoProvider::genuine(const SecretKey& sk) const {
  auto it = material_.find(sk.id_);
  return it != material_.end() && it->second == sk.material_;
}

Signature CryptoProvider::sign(const SecretKey& sk, std::span<const std::uint8_t> payload) const {
  if (!genuine(sk)) throw Error("signing key was not issued by this provider");
  return {sk.id_, keyed_hash(sk.material_, payload)};
}

bool CryptoProvider::verify(const PublicKey& pk, std::span<const std::uint8_t> payload,
                            const Signature& sig) const {
  if (sig.signer != pk.id || !material_.contains(pk.id)) return false;
  return sig.tag == keyed_hash(material_of(pk.id), payload);
}

EncryptedEnvelope CryptoProvider::encrypt(const PublicKey& recipient,
                                          std::span<const std::uint8_t> plaintext,
                                          std::uint64_t nonce) const {
  if (!material_.contains(recipient.id)) throw Error("unknown recipient key");
  const std::uint64_t material = material_of(recipient.id);
  return {recipient.id, nonce, keystream_xor(material, nonce, plaintext),
          keyed_hash(material ^ nonce, plaintext)};
}

std::optional<wire::Bytes> CryptoProvider::decrypt(const SecretKey& sk,
                                                   const EncryptedEnvelope& env) const {
  if (!genuine(sk) || sk.id_ != env.recipient) return std::nullopt;
  auto plaintext = keystream_xor(sk.material_, env.nonce, env.ciphertext);
  if (keyed_hash(sk.material_ ^ env.nonce, plaintext) != env.mac) return std::nullopt;
  return plaintext;
}

wire::Bytes certificate_body(const std::string& subject, const PublicKey& key) {
  wire::Writer w;
  w.str(0x01, subject).u64(0x02, key.id);
  return w.take();
}

CertificateAuthority::CertificateAuthority(CryptoProvider& crypto)
    : crypto_(crypto), keys_(crypto.generate_keypair()) {}

Certificate CertificateAuthority::issue(const std::string& subject, const PublicKey& key) const {
  const auto body = certificate_body(subject, key);
  return {subject, key, keys_.pk, crypto_.sign(keys_.sk, body)};
}

bool verify_certificate(const CryptoProvider& crypto, const Certificate& cert,
                        const PublicKey& ca_key) {
  if (cert.issuer != ca_key) return false;
  return crypto.verify(ca_key, certificate_body(cert.subject, cert.key), cert.signature);
}

Credentials enroll(CryptoProvider& crypto, const CertificateAuthority& ca, const std::string& id) {
  auto keys = crypto.generate_keypair();
  return {{id, keys.pk, ca.issue(id, keys.pk)}, keys.sk};
}

}  // namespace pof
