#include "prif/seal.h"

#include <sodium.h>

namespace prif {
namespace {

constexpr std::size_t kNonceBytes = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
constexpr std::size_t kMacBytes = crypto_aead_xchacha20poly1305_ietf_ABYTES;

const unsigned char* as_uchar(std::string_view s) {
  return reinterpret_cast<const unsigned char*>(s.data());
}

}  // namespace

PayloadSealer::PayloadSealer(Drbg& rng) { rng.fill(master_); }

SealKey PayloadSealer::key_for(std::string_view identity) const {
  SealKey key{};
  crypto_generichash(key.data(), key.size(), as_uchar(identity), identity.size(), master_.data(),
                     master_.size());
  return key;
}

Bytes PayloadSealer::seal(std::span<const std::uint8_t> plaintext, std::string_view identity,
                          Drbg& rng) const {
  const SealKey key = key_for(identity);
  Bytes out(kNonceBytes + plaintext.size() + kMacBytes);
  rng.fill(std::span(out.data(), kNonceBytes));
  unsigned long long written = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(out.data() + kNonceBytes, &written, plaintext.data(),
                                             plaintext.size(), as_uchar(identity), identity.size(),
                                             nullptr, out.data(), key.data());
  out.resize(kNonceBytes + written);
  return out;
}

Bytes unseal_payload(std::span<const std::uint8_t> sealed, std::string_view identity,
                     const SealKey& key) {
  if (sealed.size() < kNonceBytes + kMacBytes) throw IntegrityError("sealed payload truncated");
  Bytes plain(sealed.size() - kNonceBytes - kMacBytes);
  unsigned long long written = 0;
  const int rc = crypto_aead_xchacha20poly1305_ietf_decrypt(
      plain.data(), &written, nullptr, sealed.data() + kNonceBytes, sealed.size() - kNonceBytes,
      as_uchar(identity), identity.size(), sealed.data(), key.data());
  if (rc != 0) throw IntegrityError("payload failed authentication");
  plain.resize(written);
  return plain;
}

}  // namespace prif
