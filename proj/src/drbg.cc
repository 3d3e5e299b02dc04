#include "prif/drbg.h"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include <sodium.h>

#include "prif/wire.h"

namespace prif {

Drbg::Drbg(std::uint64_t seed, std::uint64_t stream) {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  std::uint8_t material[16];
  for (int i = 0; i < 8; ++i) {
    material[i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
    material[8 + i] = static_cast<std::uint8_t>(stream >> (56 - 8 * i));
  }
  static constexpr char kTag[] = "PRIF-DRBG";
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, key_.size());
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(kTag), sizeof kTag - 1);
  crypto_generichash_update(&st, material, sizeof material);
  crypto_generichash_final(&st, key_.data(), key_.size());
}

Drbg::Drbg(std::span<const std::uint8_t, 32> key) {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  std::copy(key.begin(), key.end(), key_.begin());
}

void Drbg::refill() {
  static constexpr std::uint8_t kNonce[crypto_stream_chacha20_NONCEBYTES] = {};
  buf_.fill(0);
  crypto_stream_chacha20_xor_ic(buf_.data(), buf_.data(), buf_.size(), kNonce, block_++,
                                key_.data());
  pos_ = 0;
}

void Drbg::fill(std::span<std::uint8_t> out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buf_.size()) refill();
    const std::size_t n = std::min(out.size() - done, buf_.size() - pos_);
    std::memcpy(out.data() + done, buf_.data() + pos_, n);
    pos_ += n;
    done += n;
  }
}

Bytes Drbg::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

std::uint64_t Drbg::next_u64() {
  std::uint8_t b[8];
  fill(b);
  std::uint64_t v = 0;
  for (std::uint8_t x : b) v = (v << 8) | x;
  return v;
}

mpz_class Drbg::below(const mpz_class& bound) {
  if (bound <= 0) throw std::invalid_argument("sampling bound must be positive");
  const std::size_t nbytes = (mpz_sizeinbase(bound.get_mpz_t(), 2) + 64 + 7) / 8;
  const Bytes raw = bytes(nbytes);
  mpz_class v = bytes_to_mpz(raw);
  return mpz_class(v % bound);
}

mpz_class Drbg::nonzero_below(const mpz_class& bound) {
  if (bound <= 1) throw std::invalid_argument("no nonzero value below bound");
  for (;;) {
    mpz_class v = below(bound);
    if (v != 0) return v;
  }
}

Drbg Drbg::fork() {
  std::array<std::uint8_t, 32> child{};
  fill(child);
  return Drbg(std::span<const std::uint8_t, 32>(child));
}

}  // namespace prif
