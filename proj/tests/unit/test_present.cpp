#include <doctest.h>

#include <array>
#include <bitset>
#include <set>

#include "mirage/ciphers/known_answer.hpp"
#include "mirage/ciphers/present.hpp"
#include "mirage/errors.hpp"
#include "mirage/hex.hpp"
#include "mirage/rng.hpp"

using namespace mirage;
using namespace mirage::ciphers;

namespace {

// Bit-serial PRESENT-80 written straight from the cipher description: an
// 80-bit key register as a bitset (bit i = k_i), pLayer as P(i) = 16 i mod 63.
constexpr std::array<unsigned, 16> kS = {0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD,
                                         0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2};

std::uint64_t oracle_present(std::span<const std::uint8_t> key, std::uint64_t pt,
                             const std::array<unsigned, 16>& sbox = kS) {
  std::bitset<80> k;
  for (int byte = 0; byte < 10; ++byte) {
    for (int b = 0; b < 8; ++b) k[79 - (8 * byte + (7 - b))] = (key[byte] >> b) & 1;
  }
  auto round_key = [&] {
    std::uint64_t rk = 0;
    for (int i = 79; i >= 16; --i) rk = (rk << 1) | k[i];
    return rk;
  };
  std::uint64_t state = pt;
  for (unsigned round = 1; round <= 31; ++round) {
    state ^= round_key();
    std::uint64_t s = 0;
    for (int n = 0; n < 16; ++n) s |= std::uint64_t{sbox[(state >> (4 * n)) & 0xF]} << (4 * n);
    std::uint64_t p = 0;
    for (int i = 0; i < 64; ++i) {
      const int dst = i == 63 ? 63 : (16 * i) % 63;
      p |= ((s >> i) & 1) << dst;
    }
    state = p;

    k = (k << 61) | (k >> 19);
    unsigned top = 0;
    for (int i = 79; i >= 76; --i) top = (top << 1) | k[i];
    top = sbox[top];
    for (int i = 0; i < 4; ++i) k[76 + i] = (top >> i) & 1;
    for (int i = 0; i < 5; ++i) k[15 + i] = k[15 + i] ^ ((round >> i) & 1);
  }
  return state ^ round_key();
}

std::array<std::uint8_t, 10> random_key(Xoshiro256& rng) {
  std::array<std::uint8_t, 10> key{};
  for (auto& b : key) b = static_cast<std::uint8_t>(rng());
  return key;
}

}  // namespace

TEST_CASE("oracle reproduces the published vectors") {
  for (const auto& v : builtin_vectors(BlockCipherKind::kPresent80)) {
    CHECK(to_hex(oracle_present(parse_hex_bytes(v.key_hex), parse_hex_u64(v.plaintext_hex))) ==
          v.ciphertext_hex);
  }
}

TEST_CASE("PRESENT-80 zero key, all-ones plaintext") {
  const std::array<std::uint8_t, 10> zero{};
  CHECK(Present80(zero).encrypt(0xFFFFFFFFFFFFFFFFULL) == 0xA112FFC72F68417BULL);
}

TEST_CASE("PRESENT-80 matches the bit-serial oracle on random inputs") {
  Xoshiro256 rng(11);
  for (int i = 0; i < 300; ++i) {
    const auto key = random_key(rng);
    const std::uint64_t pt = rng();
    const Present80 cipher(key);
    REQUIRE(cipher.encrypt(pt) == oracle_present(key, pt));
    REQUIRE(cipher.decrypt(cipher.encrypt(pt)) == pt);
  }
}

TEST_CASE("PRESENT-80 first and last round keys") {
  const std::array<std::uint8_t, 10> zero{};
  const Present80 cipher(zero);
  CHECK(cipher.round_keys().front() == 0);
  // K2 of the zero key: rotation leaves zeros, S(0) = 0xC lands in the top
  // nibble, counter 1 lands at bit 15 -> bit -1 of the 64-bit round key.
  CHECK(cipher.round_keys()[1] == 0xC000000000000000ULL);
}

TEST_CASE("key length is validated") {
  const std::array<std::uint8_t, 9> short_key{};
  const std::array<std::uint8_t, 16> long_key{};
  CHECK_THROWS_AS(Present80{short_key}, ConfigError);
  CHECK_THROWS_AS(Present80{long_key}, ConfigError);
  CHECK_THROWS_AS(BuggyPresent80{short_key}, ConfigError);
}

TEST_CASE("fixture file vectors pass") {
  const auto vectors = load_vectors(MIRAGE_TEST_DATA_DIR "/present80.kat");
  CHECK(vectors.size() == 4);
  CHECK(run_known_answers(BlockCipherKind::kPresent80, vectors).all_match());
}

TEST_CASE("malformed and missing fixture files are rejected") {
  CHECK_THROWS_AS(load_vectors(MIRAGE_TEST_DATA_DIR "/malformed.kat"), ConfigError);
  CHECK_THROWS_AS(load_vectors(MIRAGE_TEST_DATA_DIR "/does_not_exist.kat"), ConfigError);
}

TEST_CASE("defective PRESENT fails every published vector") {
  const auto report = run_known_answers(BlockCipherKind::kBuggyPresent80,
                                        builtin_vectors(BlockCipherKind::kBuggyPresent80));
  CHECK(report.total == 4);
  CHECK(report.matched == 0);
}

TEST_CASE("defective PRESENT is the reference cipher with one S-box entry changed") {
  // Independent model of the defect: the oracle with S[0xF] = 0x1.
  auto bad = kS;
  bad[0xF] = 0x1;
  std::set<unsigned> image(bad.begin(), bad.end());
  CHECK(image.size() == 15);  // no longer a permutation

  Xoshiro256 rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto key = random_key(rng);
    const std::uint64_t pt = rng();
    REQUIRE(BuggyPresent80(key).encrypt(pt) == oracle_present(key, pt, bad));
  }
}

TEST_CASE("defective PRESENT is not injective") {
  // With a zero first round key, nibbles 0xE and 0xF both go through the
  // duplicated S-box output in round 1 and never separate again.
  const std::array<std::uint8_t, 10> key{};
  const BuggyPresent80 cipher(key);
  CHECK(cipher.encrypt(0xE) == cipher.encrypt(0xF));
  CHECK(Present80(key).encrypt(0xE) != Present80(key).encrypt(0xF));
}
