#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mirage/ciphers/cipher_kind.hpp"

namespace mirage::ciphers {

struct KnownAnswer {
  std::string key_hex;
  std::string plaintext_hex;
  std::string ciphertext_hex;
};

// Published vectors compiled into the library. For kBuggyPresent80 these are
// the vectors the defective implementation is expected to FAIL (i.e. the
// standard PRESENT-80 vectors).
const std::vector<KnownAnswer>& builtin_vectors(BlockCipherKind kind);

// Reads a fixture file: one "key plaintext ciphertext" triple of hex strings
// per line; blank lines and lines starting with '#' are ignored.
std::vector<KnownAnswer> load_vectors(const std::filesystem::path& path);

// Encrypts the vector's plaintext under its key; returns the ciphertext in
// lowercase hex.
std::string evaluate(BlockCipherKind kind, const KnownAnswer& vector);

struct KatReport {
  BlockCipherKind kind;
  std::size_t total = 0;
  std::size_t matched = 0;
  bool all_match() const { return total > 0 && matched == total; }
};

KatReport run_known_answers(BlockCipherKind kind,
                            const std::vector<KnownAnswer>& vectors);

}  // namespace mirage::ciphers
