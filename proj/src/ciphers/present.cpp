#include "mirage/ciphers/present.hpp"

#include <string>

#include "mirage/errors.hpp"

namespace mirage::ciphers {
namespace {

using Sbox = std::array<std::uint8_t, 16>;

constexpr Sbox kSbox = {0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD,
                        0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2};

// Last entry should be 0x2.
constexpr Sbox kBuggySbox = {0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD,
                             0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x1};

constexpr int permuted_bit(int bit) { return bit == 63 ? 63 : (16 * bit) % 63; }

constexpr Sbox invert(const Sbox& s) {
  Sbox inv{};
  for (int i = 0; i < 16; ++i) inv[s[i]] = static_cast<std::uint8_t>(i);
  return inv;
}

// sp[n][v]: nibble v at position n pushed through the S-box then the bit
// permutation. One round of the data path is then 16 lookups.
using SpTable = std::array<std::array<std::uint64_t, 16>, 16>;

constexpr SpTable make_sp_table(const Sbox& s) {
  SpTable t{};
  for (int n = 0; n < 16; ++n) {
    for (int v = 0; v < 16; ++v) {
      const std::uint64_t in = static_cast<std::uint64_t>(s[v]) << (4 * n);
      std::uint64_t out = 0;
      for (int b = 0; b < 64; ++b) {
        out |= ((in >> b) & 1ULL) << permuted_bit(b);
      }
      t[n][v] = out;
    }
  }
  return t;
}

// Inverse bit permutation, tabulated per nibble position like kSp.
constexpr SpTable make_inverse_permutation_table() {
  SpTable t{};
  for (int n = 0; n < 16; ++n) {
    for (int v = 0; v < 16; ++v) {
      const std::uint64_t in = static_cast<std::uint64_t>(v) << (4 * n);
      std::uint64_t out = 0;
      for (int b = 0; b < 64; ++b) {
        if ((in >> permuted_bit(b)) & 1ULL) out |= 1ULL << b;
      }
      t[n][v] = out;
    }
  }
  return t;
}

const SpTable kSp = make_sp_table(kSbox);
const SpTable kBuggySp = make_sp_table(kBuggySbox);
const SpTable kInvPerm = make_inverse_permutation_table();
constexpr Sbox kInvSbox = invert(kSbox);

std::uint64_t sp_round(const SpTable& t, std::uint64_t s) {
  std::uint64_t out = 0;
  for (int n = 0; n < 16; ++n) out |= t[n][(s >> (4 * n)) & 0xF];
  return out;
}

template <std::size_t N>
void expand_key(std::span<const std::uint8_t> key, const Sbox& sbox,
                std::array<std::uint64_t, N>& round_keys) {
  if (key.size() != 10) {
    throw ConfigError("PRESENT-80 key must be 10 bytes, got " +
                      std::to_string(key.size()));
  }
  using u128 = unsigned __int128;
  const u128 mask80 = (u128{1} << 80) - 1;
  u128 reg = 0;
  for (std::uint8_t b : key) reg = (reg << 8) | b;
  for (std::size_t i = 0; i < N; ++i) {
    round_keys[i] = static_cast<std::uint64_t>(reg >> 16);
    reg = ((reg << 61) | (reg >> 19)) & mask80;
    const auto top = static_cast<unsigned>(reg >> 76) & 0xF;
    reg = (reg & ~(u128{0xF} << 76)) | (u128{sbox[top]} << 76);
    reg ^= u128{i + 1} << 15;
  }
}

}  // namespace

Present80::Present80(std::span<const std::uint8_t> key) {
  expand_key(key, kSbox, round_keys_);
}

std::uint64_t Present80::encrypt(std::uint64_t plaintext) const {
  std::uint64_t s = plaintext;
  for (int r = 0; r < kRounds; ++r) s = sp_round(kSp, s ^ round_keys_[r]);
  return s ^ round_keys_[kRounds];
}

std::uint64_t Present80::decrypt(std::uint64_t ciphertext) const {
  std::uint64_t s = ciphertext ^ round_keys_[kRounds];
  for (int r = kRounds - 1; r >= 0; --r) {
    s = sp_round(kInvPerm, s);
    std::uint64_t sub = 0;
    for (int n = 0; n < 16; ++n) {
      sub |= static_cast<std::uint64_t>(kInvSbox[(s >> (4 * n)) & 0xF]) << (4 * n);
    }
    s = sub ^ round_keys_[r];
  }
  return s;
}

BuggyPresent80::BuggyPresent80(std::span<const std::uint8_t> key) {
  expand_key(key, kBuggySbox, round_keys_);
}

std::uint64_t BuggyPresent80::encrypt(std::uint64_t plaintext) const {
  std::uint64_t s = plaintext;
  for (int r = 0; r < kRounds; ++r) s = sp_round(kBuggySp, s ^ round_keys_[r]);
  return s ^ round_keys_[kRounds];
}

}  // namespace mirage::ciphers
