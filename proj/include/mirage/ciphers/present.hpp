#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace mirage::ciphers {

// PRESENT with an 80-bit key: 31 rounds, 32 round keys. Keys are given most
// significant byte first, as in the published test vectors.
class Present80 {
 public:
  static constexpr std::size_t kKeyBytes = 10;
  static constexpr int kRounds = 31;

  explicit Present80(std::span<const std::uint8_t> key);

  std::uint64_t encrypt(std::uint64_t plaintext) const;
  std::uint64_t decrypt(std::uint64_t ciphertext) const;

  const std::array<std::uint64_t, kRounds + 1>& round_keys() const {
    return round_keys_;
  }

 private:
  std::array<std::uint64_t, kRounds + 1> round_keys_{};
};

// PRESENT-80 as shipped by the broken simulator under study: the S-box table
// carries a transcription error (S[0xF] = 0x1, duplicating S[0xE]), so the
// substitution layer is not a permutation. The defective table is shared by
// the data path and the key schedule. Fails the published known-answer
// vectors and maps uniformly random inputs onto a visibly skewed output
// distribution.
class BuggyPresent80 {
 public:
  static constexpr std::size_t kKeyBytes = 10;
  static constexpr int kRounds = 31;

  explicit BuggyPresent80(std::span<const std::uint8_t> key);

  std::uint64_t encrypt(std::uint64_t plaintext) const;

 private:
  std::array<std::uint64_t, kRounds + 1> round_keys_{};
};

}  // namespace mirage::ciphers
