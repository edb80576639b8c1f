#include <doctest.h>

#include <set>

#include "mirage/ciphers/aes128.hpp"
#include "mirage/ciphers/index_derivation.hpp"
#include "mirage/ciphers/prince.hpp"
#include "mirage/errors.hpp"
#include "mirage/rng.hpp"

using namespace mirage;
using namespace mirage::ciphers;

TEST_CASE("cipher names round-trip") {
  for (auto k : {BlockCipherKind::kPresent80, BlockCipherKind::kPrince64,
                 BlockCipherKind::kAes128, BlockCipherKind::kBuggyPresent80}) {
    CHECK(parse_cipher_kind(to_string(k)) == k);
  }
  CHECK(parse_cipher_kind("aes") == BlockCipherKind::kAes128);
  CHECK_FALSE(parse_cipher_kind("des").has_value());
}

TEST_CASE("CipherKey validates its length") {
  CHECK_THROWS_AS(CipherKey(BlockCipherKind::kAes128, std::vector<std::uint8_t>(10)), ConfigError);
  CHECK_NOTHROW(CipherKey(BlockCipherKind::kPresent80, std::vector<std::uint8_t>(10)));
}

TEST_CASE("IndexDerivation preconditions") {
  Xoshiro256 rng(1);
  const auto a = CipherKey::random(BlockCipherKind::kPrince64, rng);
  const auto b = CipherKey::random(BlockCipherKind::kPrince64, rng);
  const auto c = CipherKey::random(BlockCipherKind::kAes128, rng);
  CHECK_THROWS_AS(IndexDerivation({a, b}, 1000), ConfigError);   // not a power of two
  CHECK_THROWS_AS(IndexDerivation({a, b}, 0), ConfigError);
  CHECK_THROWS_AS(IndexDerivation({a, a}, 1024), ConfigError);   // skews must differ
  CHECK_THROWS_AS(IndexDerivation({a, c}, 1024), ConfigError);   // mixed ciphers
  const IndexDerivation idx({a, b}, 1024);
  CHECK_THROWS_AS(idx.set_index(2, 0), UsageError);
  CHECK_THROWS_AS(idx.set_index(-1, 0), UsageError);
}

TEST_CASE("defective PRESENT needs an explicit policy") {
  CHECK_THROWS_AS(
      IndexDerivation::with_random_keys(BlockCipherKind::kBuggyPresent80, 1024, 1), ConfigError);
  CHECK_NOTHROW(IndexDerivation::with_random_keys(BlockCipherKind::kBuggyPresent80, 1024, 1,
                                                  CipherPolicy::kAllowBuggyPresent));
}

TEST_CASE("set index is the low bits of the ciphertext") {
  Xoshiro256 rng(2);
  const auto k0 = CipherKey::random(BlockCipherKind::kPrince64, rng);
  const auto k1 = CipherKey::random(BlockCipherKind::kPrince64, rng);
  const IndexDerivation idx({k0, k1}, 16384);
  const Prince64 p0(k0.bytes()), p1(k1.bytes());
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t addr = rng();
    CHECK(idx.set_index(0, addr) == (p0.encrypt(addr) & 16383));
    CHECK(idx.set_index(1, addr) == (p1.encrypt(addr) & 16383));
  }
}

TEST_CASE("AES index: address zero-padded into the low half, low half of ciphertext") {
  Xoshiro256 rng(3);
  const auto k0 = CipherKey::random(BlockCipherKind::kAes128, rng);
  const auto k1 = CipherKey::random(BlockCipherKind::kAes128, rng);
  const IndexDerivation idx({k0, k1}, 1u << 14);
  const Aes128 aes(k0.bytes());
  const std::uint64_t addr = 0x0123456789abcdefULL;
  Aes128::Block block{};
  for (int i = 0; i < 8; ++i) block[8 + i] = static_cast<std::uint8_t>(addr >> (56 - 8 * i));
  const auto ct = aes.encrypt(block);
  const std::uint32_t expected = (std::uint32_t{ct[14]} << 8 | ct[15]) & 0x3FFF;
  CHECK(idx.set_index(0, addr) == expected);
}

TEST_CASE("random keys are deterministic per seed and skews are independent") {
  const auto a = IndexDerivation::with_random_keys(BlockCipherKind::kAes128, 16384, 77);
  const auto b = IndexDerivation::with_random_keys(BlockCipherKind::kAes128, 16384, 77);
  const auto c = IndexDerivation::with_random_keys(BlockCipherKind::kAes128, 16384, 78);
  int same_seed = 0, other_seed = 0, same_skew = 0;
  for (std::uint64_t addr = 0; addr < 1000; ++addr) {
    same_seed += a.set_index(0, addr) == b.set_index(0, addr);
    other_seed += a.set_index(0, addr) == c.set_index(0, addr);
    same_skew += a.set_index(0, addr) == a.set_index(1, addr);
  }
  CHECK(same_seed == 1000);
  CHECK(other_seed < 5);
  CHECK(same_skew < 5);
}
