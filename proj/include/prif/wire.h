#pragma once

// Byte-level encoding shared by the handshake and data frames. Integers are
// unsigned big-endian with minimal length (zero encodes as no bytes); every
// variable-length field carries a 4-byte big-endian length prefix.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

#include "prif/core.h"

namespace prif {

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Bytes mpz_to_bytes(const mpz_class& v);
mpz_class bytes_to_mpz(std::span<const std::uint8_t> b);

std::string to_hex(std::span<const std::uint8_t> b);
Bytes from_hex(std::string_view hex);

class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v);
  ByteWriter& u16(std::uint16_t v);
  ByteWriter& u32(std::uint32_t v);
  ByteWriter& u64(std::uint64_t v);
  ByteWriter& raw(std::span<const std::uint8_t> b);
  ByteWriter& field(std::span<const std::uint8_t> b);  // length-prefixed
  ByteWriter& field(std::string_view s);
  ByteWriter& field(const mpz_class& v);

  const Bytes& bytes() const& { return out_; }
  Bytes bytes() && { return std::move(out_); }

 private:
  Bytes out_;
};

/// Reads what ByteWriter wrote; throws WireError on truncation.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  std::span<const std::uint8_t> raw(std::size_t n);
  std::span<const std::uint8_t> field();
  std::string string_field();
  mpz_class mpz_field();

  bool done() const { return pos_ == in_.size(); }
  void expect_done() const;

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace prif
