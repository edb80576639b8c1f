#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "mirage/ciphers/aes128.hpp"
#include "mirage/ciphers/cipher_kind.hpp"
#include "mirage/ciphers/present.hpp"
#include "mirage/ciphers/prince.hpp"

namespace mirage::ciphers {

class CipherKey {
 public:
  // Throws ConfigError if the key length does not match the cipher.
  CipherKey(BlockCipherKind kind, std::vector<std::uint8_t> bytes);

  template <typename Rng>
  static CipherKey random(BlockCipherKind kind, Rng& rng) {
    std::vector<std::uint8_t> bytes(key_length(kind));
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng() >> 56);
    return CipherKey(kind, std::move(bytes));
  }

  BlockCipherKind kind() const { return kind_; }
  std::span<const std::uint8_t> bytes() const { return bytes_; }

  friend bool operator==(const CipherKey&, const CipherKey&) = default;

 private:
  BlockCipherKind kind_;
  std::vector<std::uint8_t> bytes_;
};

// A keyed 64-bit-address -> 64-bit map. For AES the address is placed in the
// low 64 bits of an otherwise zero block and the low 64 bits of the
// ciphertext are returned.
class AddressCipher {
 public:
  AddressCipher(const CipherKey& key, CipherPolicy policy);

  std::uint64_t encrypt(std::uint64_t address) const;
  BlockCipherKind kind() const { return kind_; }

 private:
  BlockCipherKind kind_;
  std::variant<Present80, Prince64, Aes128, BuggyPresent80> engine_;
};

// Cipher-based set-index function for a two-skew tag store. Each skew uses
// its own key; the index is the low log2(num_sets) bits of the ciphertext.
class IndexDerivation {
 public:
  static constexpr int kSkews = 2;

  IndexDerivation(const std::array<CipherKey, kSkews>& keys,
                  std::uint32_t num_sets,
                  CipherPolicy policy = CipherPolicy::kStandardOnly);

  // Draws an independent random key per skew from a generator seeded with
  // `seed`.
  static IndexDerivation with_random_keys(
      BlockCipherKind kind, std::uint32_t num_sets, std::uint64_t seed,
      CipherPolicy policy = CipherPolicy::kStandardOnly);

  // Throws UsageError for a skew outside {0, 1}.
  std::uint32_t set_index(int skew, std::uint64_t line_address) const;

  std::uint32_t num_sets() const { return num_sets_; }
  BlockCipherKind kind() const { return ciphers_[0].kind(); }

 private:
  std::array<AddressCipher, kSkews> ciphers_;
  std::uint32_t num_sets_;
  std::uint64_t mask_;
};

}  // namespace mirage::ciphers
