#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace mirage::ciphers {

// FIPS-197 AES with a 128-bit key. Table-driven, not constant time.
class Aes128 {
 public:
  static constexpr std::size_t kKeyBytes = 16;
  using Block = std::array<std::uint8_t, 16>;

  explicit Aes128(std::span<const std::uint8_t> key);

  Block encrypt(const Block& plaintext) const;
  Block decrypt(const Block& ciphertext) const;

 private:
  std::array<std::uint32_t, 44> round_keys_{};
};

}  // namespace mirage::ciphers
