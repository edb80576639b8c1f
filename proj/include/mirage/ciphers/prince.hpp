#pragma once

#include <cstdint>
#include <span>

namespace mirage::ciphers {

// PRINCE: 64-bit block, 128-bit key k0 || k1 (k0 = first 8 bytes), FX
// construction around a 12-round reflective core.
class Prince64 {
 public:
  static constexpr std::size_t kKeyBytes = 16;

  explicit Prince64(std::span<const std::uint8_t> key);
  Prince64(std::uint64_t k0, std::uint64_t k1);

  std::uint64_t encrypt(std::uint64_t plaintext) const;
  std::uint64_t decrypt(std::uint64_t ciphertext) const;

 private:
  std::uint64_t core(std::uint64_t state, std::uint64_t k1) const;

  std::uint64_t k0_;
  std::uint64_t k0_prime_;
  std::uint64_t k1_;
};

}  // namespace mirage::ciphers
