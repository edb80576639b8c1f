#include "mirage/ciphers/prince.hpp"

#include <array>
#include <string>

#include "mirage/errors.hpp"

namespace mirage::ciphers {
namespace {

constexpr std::array<std::uint8_t, 16> kSbox = {
    0xB, 0xF, 0x3, 0x2, 0xA, 0xC, 0x9, 0x1,
    0x6, 0x7, 0x8, 0x0, 0xE, 0x5, 0xD, 0x4};

constexpr std::array<std::uint64_t, 12> kRoundConstants = {
    0x0000000000000000ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL,
    0x082efa98ec4e6c89ULL, 0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL,
    0x7ef84f78fd955cb1ULL, 0x85840851f1ac43aaULL, 0xc882d32f25323c54ULL,
    0x64a51195e0e3610dULL, 0xd3b5a399ca0c2399ULL, 0xc0ac29b7c97c50ddULL};

// Nibbles are numbered from the most significant end. Output nibble i of
// ShiftRows is input nibble kShiftRows[i].
constexpr std::array<int, 16> kShiftRows = {0, 5, 10, 15, 4, 9, 14, 3,
                                            8, 13, 2, 7, 12, 1, 6, 11};

struct Tables {
  std::array<std::uint8_t, 256> sbox_byte{};
  std::array<std::uint8_t, 256> inv_sbox_byte{};
  // mprime[n][v]: contribution of nibble value v at nibble position n to the
  // output of the M' layer.
  std::array<std::array<std::uint64_t, 16>, 16> mprime{};

  Tables() {
    std::array<std::uint8_t, 16> inv{};
    for (int i = 0; i < 16; ++i) inv[kSbox[i]] = static_cast<std::uint8_t>(i);
    for (int b = 0; b < 256; ++b) {
      sbox_byte[b] = static_cast<std::uint8_t>((kSbox[b >> 4] << 4) | kSbox[b & 0xF]);
      inv_sbox_byte[b] = static_cast<std::uint8_t>((inv[b >> 4] << 4) | inv[b & 0xF]);
    }

    // 16x16 matrices M^(0), M^(1) assembled from 4x4 blocks M_k, where M_k
    // is the identity with row k zeroed.
    constexpr int kHat0[4][4] = {{0, 1, 2, 3}, {1, 2, 3, 0}, {2, 3, 0, 1}, {3, 0, 1, 2}};
    constexpr int kHat1[4][4] = {{1, 2, 3, 0}, {2, 3, 0, 1}, {3, 0, 1, 2}, {0, 1, 2, 3}};
    auto entry = [](const int (&hat)[4][4], int row, int col) {
      const int block = hat[row / 4][col / 4];
      return (row % 4 == col % 4) && (row % 4 != block);
    };
    // Chunk order across the state: M^(0), M^(1), M^(1), M^(0).
    for (int n = 0; n < 16; ++n) {
      const int chunk = n / 4;
      const auto& hat = (chunk == 0 || chunk == 3) ? kHat0 : kHat1;
      for (int v = 0; v < 16; ++v) {
        std::uint64_t out = 0;
        for (int bit = 0; bit < 4; ++bit) {
          if (!((v >> (3 - bit)) & 1)) continue;
          const int col = (n % 4) * 4 + bit;  // MSB-first within the chunk
          for (int row = 0; row < 16; ++row) {
            if (entry(hat, row, col)) {
              out |= 1ULL << (63 - (16 * chunk + row));
            }
          }
        }
        mprime[n][v] = out;
      }
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

std::uint64_t nibble(std::uint64_t s, int i) { return (s >> (60 - 4 * i)) & 0xF; }

std::uint64_t substitute(std::uint64_t s, const std::array<std::uint8_t, 256>& t) {
  std::uint64_t out = 0;
  for (int b = 0; b < 8; ++b) {
    out |= static_cast<std::uint64_t>(t[(s >> (8 * b)) & 0xFF]) << (8 * b);
  }
  return out;
}

std::uint64_t mprime(std::uint64_t s) {
  const auto& t = tables().mprime;
  std::uint64_t out = 0;
  for (int n = 0; n < 16; ++n) out ^= t[n][nibble(s, n)];
  return out;
}

std::uint64_t shift_rows(std::uint64_t s) {
  std::uint64_t out = 0;
  for (int i = 0; i < 16; ++i) out |= nibble(s, kShiftRows[i]) << (60 - 4 * i);
  return out;
}

std::uint64_t inverse_shift_rows(std::uint64_t s) {
  std::uint64_t out = 0;
  for (int i = 0; i < 16; ++i) out |= nibble(s, i) << (60 - 4 * kShiftRows[i]);
  return out;
}

std::uint64_t load_be64(std::span<const std::uint8_t> bytes) {
  std::uint64_t v = 0;
  for (std::uint8_t b : bytes) v = (v << 8) | b;
  return v;
}

}  // namespace

Prince64::Prince64(std::span<const std::uint8_t> key) {
  if (key.size() != kKeyBytes) {
    throw ConfigError("PRINCE key must be 16 bytes, got " + std::to_string(key.size()));
  }
  *this = Prince64(load_be64(key.first(8)), load_be64(key.subspan(8)));
}

Prince64::Prince64(std::uint64_t k0, std::uint64_t k1)
    : k0_(k0), k0_prime_(((k0 >> 1) | (k0 << 63)) ^ (k0 >> 63)), k1_(k1) {
  (void)tables();
}

std::uint64_t Prince64::core(std::uint64_t s, std::uint64_t k1) const {
  const auto& t = tables();
  s ^= k1 ^ kRoundConstants[0];
  for (int i = 1; i <= 5; ++i) {
    s = shift_rows(mprime(substitute(s, t.sbox_byte)));
    s ^= kRoundConstants[i] ^ k1;
  }
  s = substitute(mprime(substitute(s, t.sbox_byte)), t.inv_sbox_byte);
  for (int i = 6; i <= 10; ++i) {
    s ^= kRoundConstants[i] ^ k1;
    s = substitute(mprime(inverse_shift_rows(s)), t.inv_sbox_byte);
  }
  return s ^ kRoundConstants[11] ^ k1;
}

std::uint64_t Prince64::encrypt(std::uint64_t plaintext) const {
  return core(plaintext ^ k0_, k1_) ^ k0_prime_;
}

// alpha-reflection: decryption is the core keyed with k1 ^ alpha and the two
// whitening keys swapped.
std::uint64_t Prince64::decrypt(std::uint64_t ciphertext) const {
  constexpr std::uint64_t kAlpha = 0xc0ac29b7c97c50ddULL;
  return core(ciphertext ^ k0_prime_, k1_ ^ kAlpha) ^ k0_;
}

}  // namespace mirage::ciphers
