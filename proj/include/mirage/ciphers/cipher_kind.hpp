#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace mirage::ciphers {

enum class BlockCipherKind {
  kPresent80,
  kPrince64,
  kAes128,
  // Reproduction of a defective PRESENT-80. Only constructible through an
  // explicit CipherPolicy::kAllowBuggyPresent.
  kBuggyPresent80,
};

enum class CipherPolicy {
  kStandardOnly,
  kAllowBuggyPresent,
};

std::string_view to_string(BlockCipherKind kind);
std::optional<BlockCipherKind> parse_cipher_kind(std::string_view name);

// Key length in bytes.
constexpr std::size_t key_length(BlockCipherKind kind) {
  switch (kind) {
    case BlockCipherKind::kPresent80:
    case BlockCipherKind::kBuggyPresent80:
      return 10;
    case BlockCipherKind::kPrince64:
    case BlockCipherKind::kAes128:
      return 16;
  }
  return 0;
}

constexpr unsigned block_bits(BlockCipherKind kind) {
  return kind == BlockCipherKind::kAes128 ? 128 : 64;
}

}  // namespace mirage::ciphers
