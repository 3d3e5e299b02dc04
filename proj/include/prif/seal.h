#pragma once

// Destination-only payload sealing. This stands in for identity-based
// encryption: a sealing authority holds a master key, anyone can seal to a
// pseudo-identity through it, and only the holder of that identity's
// derived key can open the result. Authenticated with
// XChaCha20-Poly1305; the identity is bound as associated data.

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>

#include "prif/core.h"
#include "prif/drbg.h"

namespace prif {

using SealKey = std::array<std::uint8_t, 32>;

class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PayloadSealer {
 public:
  explicit PayloadSealer(Drbg& rng);

  /// Key handed to the owner of `identity` at registration.
  SealKey key_for(std::string_view identity) const;

  /// nonce(24) || ciphertext || tag(16)
  Bytes seal(std::span<const std::uint8_t> plaintext, std::string_view identity, Drbg& rng) const;

 private:
  SealKey master_{};
};

/// Throws IntegrityError when the key does not match or the bytes were altered.
Bytes unseal_payload(std::span<const std::uint8_t> sealed, std::string_view identity,
                     const SealKey& key);

}  // namespace prif
