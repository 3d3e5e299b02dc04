#pragma once

#include <array>
#include <cstdint>
#include <span>

#include <gmpxx.h>

#include "prif/core.h"

namespace prif {

/// Deterministic ChaCha20 keystream generator. All protocol randomness
/// (group secrets, member ids, ephemerals, reject tags, seal nonces) is drawn
/// from one of these so that a run is reproducible from its seed.
class Drbg {
 public:
  explicit Drbg(std::uint64_t seed, std::uint64_t stream = 0);
  explicit Drbg(std::span<const std::uint8_t, 32> key);

  void fill(std::span<std::uint8_t> out);
  Bytes bytes(std::size_t n);
  std::uint64_t next_u64();

  /// Uniform in [0, bound) by oversampling 64 extra bits.
  mpz_class below(const mpz_class& bound);
  /// Uniform in [1, bound).
  mpz_class nonzero_below(const mpz_class& bound);

  /// Independent child generator; the parent stream advances by 32 bytes.
  Drbg fork();

 private:
  void refill();

  std::array<std::uint8_t, 32> key_{};
  std::uint64_t block_ = 0;
  std::array<std::uint8_t, 64> buf_{};
  std::size_t pos_ = 64;
};

}  // namespace prif
