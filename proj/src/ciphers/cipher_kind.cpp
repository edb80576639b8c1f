#include "mirage/ciphers/cipher_kind.hpp"

namespace mirage::ciphers {

std::string_view to_string(BlockCipherKind kind) {
  switch (kind) {
    case BlockCipherKind::kPresent80:
      return "present80";
    case BlockCipherKind::kPrince64:
      return "prince64";
    case BlockCipherKind::kAes128:
      return "aes128";
    case BlockCipherKind::kBuggyPresent80:
      return "buggy-present80";
  }
  return "unknown";
}

std::optional<BlockCipherKind> parse_cipher_kind(std::string_view name) {
  for (auto kind : {BlockCipherKind::kPresent80, BlockCipherKind::kPrince64,
                    BlockCipherKind::kAes128, BlockCipherKind::kBuggyPresent80}) {
    if (name == to_string(kind)) return kind;
  }
  if (name == "present") return BlockCipherKind::kPresent80;
  if (name == "prince") return BlockCipherKind::kPrince64;
  if (name == "aes") return BlockCipherKind::kAes128;
  return std::nullopt;
}

}  // namespace mirage::ciphers
