#include "mirage/ciphers/aes128.hpp"

#include <string>

#include "mirage/errors.hpp"

namespace mirage::ciphers {
namespace {

std::uint8_t xtime(std::uint8_t x) {
  return static_cast<std::uint8_t>((x << 1) ^ ((x & 0x80) ? 0x1B : 0x00));
}

std::uint8_t gmul(std::uint8_t a, std::uint8_t b) {
  std::uint8_t p = 0;
  while (b) {
    if (b & 1) p ^= a;
    a = xtime(a);
    b >>= 1;
  }
  return p;
}

std::uint8_t rotl8(std::uint8_t x, int k) {
  return static_cast<std::uint8_t>((x << k) | (x >> (8 - k)));
}

struct Tables {
  std::array<std::uint8_t, 256> sbox{};
  std::array<std::uint8_t, 256> inv_sbox{};
  // te[r][x]: column contribution of S(x) entering row r of MixColumns,
  // packed big-endian (row 0 in the top byte).
  std::array<std::array<std::uint32_t, 256>, 4> te{};

  Tables() {
    // S(x) = affine(x^-1) over GF(2^8); walk the multiplicative group with
    // generator 3 to get inverses.
    std::uint8_t p = 1, q = 1;
    do {
      p = static_cast<std::uint8_t>(p ^ xtime(p));  // p *= 3
      q ^= static_cast<std::uint8_t>(q << 1);        // q /= 3
      q ^= static_cast<std::uint8_t>(q << 2);
      q ^= static_cast<std::uint8_t>(q << 4);
      if (q & 0x80) q ^= 0x09;
      const std::uint8_t s = static_cast<std::uint8_t>(
          q ^ rotl8(q, 1) ^ rotl8(q, 2) ^ rotl8(q, 3) ^ rotl8(q, 4) ^ 0x63);
      sbox[p] = s;
    } while (p != 1);
    sbox[0] = 0x63;
    for (int i = 0; i < 256; ++i) inv_sbox[sbox[i]] = static_cast<std::uint8_t>(i);

    for (int x = 0; x < 256; ++x) {
      const std::uint8_t s = sbox[x];
      const std::uint8_t s2 = xtime(s);
      const std::uint8_t s3 = static_cast<std::uint8_t>(s2 ^ s);
      const std::uint32_t col = (std::uint32_t{s2} << 24) | (std::uint32_t{s} << 16) |
                                (std::uint32_t{s} << 8) | s3;
      te[0][x] = col;
      te[1][x] = (col >> 8) | (col << 24);
      te[2][x] = (col >> 16) | (col << 16);
      te[3][x] = (col >> 24) | (col << 8);
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

std::uint32_t load_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | p[3];
}

void store_be32(std::uint32_t v, std::uint8_t* p) {
  p[0] = static_cast<std::uint8_t>(v >> 24);
  p[1] = static_cast<std::uint8_t>(v >> 16);
  p[2] = static_cast<std::uint8_t>(v >> 8);
  p[3] = static_cast<std::uint8_t>(v);
}

std::uint32_t sub_word(std::uint32_t w) {
  const auto& s = tables().sbox;
  return (std::uint32_t{s[w >> 24]} << 24) | (std::uint32_t{s[(w >> 16) & 0xFF]} << 16) |
         (std::uint32_t{s[(w >> 8) & 0xFF]} << 8) | s[w & 0xFF];
}

}  // namespace

Aes128::Aes128(std::span<const std::uint8_t> key) {
  if (key.size() != kKeyBytes) {
    throw ConfigError("AES-128 key must be 16 bytes, got " + std::to_string(key.size()));
  }
  for (int i = 0; i < 4; ++i) round_keys_[i] = load_be32(key.data() + 4 * i);
  std::uint32_t rcon = 0x01;
  for (int i = 4; i < 44; ++i) {
    std::uint32_t t = round_keys_[i - 1];
    if (i % 4 == 0) {
      t = sub_word((t << 8) | (t >> 24)) ^ (rcon << 24);
      rcon = xtime(static_cast<std::uint8_t>(rcon));
    }
    round_keys_[i] = round_keys_[i - 4] ^ t;
  }
}

Aes128::Block Aes128::encrypt(const Block& plaintext) const {
  const auto& t = tables();
  std::uint32_t s[4];
  for (int c = 0; c < 4; ++c) s[c] = load_be32(plaintext.data() + 4 * c) ^ round_keys_[c];
  for (int round = 1; round < 10; ++round) {
    std::uint32_t n[4];
    for (int c = 0; c < 4; ++c) {
      n[c] = t.te[0][s[c] >> 24] ^ t.te[1][(s[(c + 1) % 4] >> 16) & 0xFF] ^
             t.te[2][(s[(c + 2) % 4] >> 8) & 0xFF] ^ t.te[3][s[(c + 3) % 4] & 0xFF] ^
             round_keys_[4 * round + c];
    }
    for (int c = 0; c < 4; ++c) s[c] = n[c];
  }
  Block out{};
  for (int c = 0; c < 4; ++c) {
    const std::uint32_t w =
        (std::uint32_t{t.sbox[s[c] >> 24]} << 24) |
        (std::uint32_t{t.sbox[(s[(c + 1) % 4] >> 16) & 0xFF]} << 16) |
        (std::uint32_t{t.sbox[(s[(c + 2) % 4] >> 8) & 0xFF]} << 8) |
        t.sbox[s[(c + 3) % 4] & 0xFF];
    store_be32(w ^ round_keys_[40 + c], out.data() + 4 * c);
  }
  return out;
}

// Byte-oriented inverse cipher; only used for round-trip checks.
Aes128::Block Aes128::decrypt(const Block& ciphertext) const {
  const auto& t = tables();
  std::uint8_t st[16];
  auto add_round_key = [&](int round) {
    for (int c = 0; c < 4; ++c) {
      std::uint8_t k[4];
      store_be32(round_keys_[4 * round + c], k);
      for (int r = 0; r < 4; ++r) st[4 * c + r] ^= k[r];
    }
  };
  auto inv_shift_sub = [&]() {
    std::uint8_t tmp[16];
    for (int c = 0; c < 4; ++c) {
      for (int r = 0; r < 4; ++r) tmp[4 * ((c + r) % 4) + r] = st[4 * c + r];
    }
    for (int i = 0; i < 16; ++i) st[i] = t.inv_sbox[tmp[i]];
  };
  for (int i = 0; i < 16; ++i) st[i] = ciphertext[i];
  add_round_key(10);
  for (int round = 9; round >= 1; --round) {
    inv_shift_sub();
    add_round_key(round);
    for (int c = 0; c < 4; ++c) {
      std::uint8_t* col = st + 4 * c;
      const std::uint8_t a0 = col[0], a1 = col[1], a2 = col[2], a3 = col[3];
      col[0] = gmul(a0, 14) ^ gmul(a1, 11) ^ gmul(a2, 13) ^ gmul(a3, 9);
      col[1] = gmul(a0, 9) ^ gmul(a1, 14) ^ gmul(a2, 11) ^ gmul(a3, 13);
      col[2] = gmul(a0, 13) ^ gmul(a1, 9) ^ gmul(a2, 14) ^ gmul(a3, 11);
      col[3] = gmul(a0, 11) ^ gmul(a1, 13) ^ gmul(a2, 9) ^ gmul(a3, 14);
    }
  }
  inv_shift_sub();
  add_round_key(0);
  Block out{};
  for (int i = 0; i < 16; ++i) out[i] = st[i];
  return out;
}

}  // namespace mirage::ciphers
