#include "mirage/ciphers/index_derivation.hpp"

#include <bit>
#include <string>
#include <type_traits>

#include "mirage/errors.hpp"
#include "mirage/rng.hpp"

namespace mirage::ciphers {
namespace {

std::variant<Present80, Prince64, Aes128, BuggyPresent80> make_engine(
    const CipherKey& key, CipherPolicy policy) {
  switch (key.kind()) {
    case BlockCipherKind::kPresent80:
      return Present80(key.bytes());
    case BlockCipherKind::kPrince64:
      return Prince64(key.bytes());
    case BlockCipherKind::kAes128:
      return Aes128(key.bytes());
    case BlockCipherKind::kBuggyPresent80:
      if (policy != CipherPolicy::kAllowBuggyPresent) {
        throw ConfigError("buggy-present cipher requires the buggy-present bug-compat flag");
      }
      return BuggyPresent80(key.bytes());
  }
  throw ConfigError("unknown cipher kind");
}

std::uint64_t encrypt_zero_padded(const Aes128& aes, std::uint64_t address) {
  Aes128::Block block{};
  for (int i = 0; i < 8; ++i) {
    block[8 + i] = static_cast<std::uint8_t>(address >> (56 - 8 * i));
  }
  const Aes128::Block ct = aes.encrypt(block);
  std::uint64_t low = 0;
  for (int i = 8; i < 16; ++i) low = (low << 8) | ct[i];
  return low;
}

}  // namespace

CipherKey::CipherKey(BlockCipherKind kind, std::vector<std::uint8_t> bytes)
    : kind_(kind), bytes_(std::move(bytes)) {
  if (bytes_.size() != key_length(kind_)) {
    throw ConfigError(std::string(to_string(kind_)) + " key must be " +
                      std::to_string(key_length(kind_)) + " bytes, got " +
                      std::to_string(bytes_.size()));
  }
}

AddressCipher::AddressCipher(const CipherKey& key, CipherPolicy policy)
    : kind_(key.kind()), engine_(make_engine(key, policy)) {}

std::uint64_t AddressCipher::encrypt(std::uint64_t address) const {
  return std::visit(
      [address](const auto& engine) -> std::uint64_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(engine)>, Aes128>) {
          return encrypt_zero_padded(engine, address);
        } else {
          return engine.encrypt(address);
        }
      },
      engine_);
}

IndexDerivation::IndexDerivation(const std::array<CipherKey, kSkews>& keys,
                                 std::uint32_t num_sets, CipherPolicy policy)
    : ciphers_{AddressCipher(keys[0], policy), AddressCipher(keys[1], policy)},
      num_sets_(num_sets),
      mask_(static_cast<std::uint64_t>(num_sets) - 1) {
  if (num_sets == 0 || !std::has_single_bit(num_sets)) {
    throw ConfigError("number of sets must be a power of two, got " + std::to_string(num_sets));
  }
  if (keys[0].kind() != keys[1].kind()) {
    throw ConfigError("both skews must use the same cipher");
  }
  if (keys[0] == keys[1]) {
    throw ConfigError("skew keys must be distinct");
  }
}

IndexDerivation IndexDerivation::with_random_keys(BlockCipherKind kind, std::uint32_t num_sets,
                                                  std::uint64_t seed, CipherPolicy policy) {
  Xoshiro256 rng(seed);
  CipherKey k0 = CipherKey::random(kind, rng);
  CipherKey k1 = CipherKey::random(kind, rng);
  while (k1 == k0) k1 = CipherKey::random(kind, rng);
  return IndexDerivation({std::move(k0), std::move(k1)}, num_sets, policy);
}

std::uint32_t IndexDerivation::set_index(int skew, std::uint64_t line_address) const {
  if (skew < 0 || skew >= kSkews) {
    throw UsageError("skew id must be 0 or 1, got " + std::to_string(skew));
  }
  return static_cast<std::uint32_t>(ciphers_[skew].encrypt(line_address) & mask_);
}

}  // namespace mirage::ciphers
