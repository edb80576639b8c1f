#include "mirage/ciphers/known_answer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "mirage/ciphers/aes128.hpp"
#include "mirage/ciphers/present.hpp"
#include "mirage/ciphers/prince.hpp"
#include "mirage/errors.hpp"
#include "mirage/hex.hpp"

namespace mirage::ciphers {
namespace {

const std::vector<KnownAnswer> kPresentVectors = {
    {"00000000000000000000", "0000000000000000", "5579c1387b228445"},
    {"ffffffffffffffffffff", "0000000000000000", "e72c46c0f5945049"},
    {"00000000000000000000", "ffffffffffffffff", "a112ffc72f68417b"},
    {"ffffffffffffffffffff", "ffffffffffffffff", "3333dcd3213210d2"},
};

const std::vector<KnownAnswer> kPrinceVectors = {
    {"00000000000000000000000000000000", "0000000000000000", "818665aa0d02dfda"},
    {"00000000000000000000000000000000", "ffffffffffffffff", "604ae6ca03c20ada"},
    {"ffffffffffffffff0000000000000000", "0000000000000000", "9fb51935fc3df524"},
    {"0000000000000000ffffffffffffffff", "0000000000000000", "78a54cbe737bb7ef"},
    {"0000000000000000fedcba9876543210", "0123456789abcdef", "ae25ad3ca8fa9ccf"},
};

const std::vector<KnownAnswer> kAesVectors = {
    {"2b7e151628aed2a6abf7158809cf4f3c", "3243f6a8885a308d313198a2e0370734",
     "3925841d02dc09fbdc118597196a0b32"},
    {"000102030405060708090a0b0c0d0e0f", "00112233445566778899aabbccddeeff",
     "69c4e0d86a7b0430d8cdb78070b4c55a"},
    {"2b7e151628aed2a6abf7158809cf4f3c", "6bc1bee22e409f96e93d7e117393172a",
     "3ad77bb40d7a3660a89ecaf32466ef97"},
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s.size() >= 2 && s[0] == '0' && s[1] == 'x') s.erase(0, 2);
  return s;
}

}  // namespace

const std::vector<KnownAnswer>& builtin_vectors(BlockCipherKind kind) {
  switch (kind) {
    case BlockCipherKind::kPresent80:
    case BlockCipherKind::kBuggyPresent80:
      return kPresentVectors;
    case BlockCipherKind::kPrince64:
      return kPrinceVectors;
    case BlockCipherKind::kAes128:
      return kAesVectors;
  }
  return kPresentVectors;
}

std::vector<KnownAnswer> load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open vector file " + path.string());
  std::vector<KnownAnswer> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    KnownAnswer v;
    std::string extra;
    if (!(fields >> v.key_hex >> v.plaintext_hex >> v.ciphertext_hex) || (fields >> extra)) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'key plaintext ciphertext'");
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::string evaluate(BlockCipherKind kind, const KnownAnswer& vector) {
  const std::vector<std::uint8_t> key = parse_hex_bytes(vector.key_hex);
  switch (kind) {
    case BlockCipherKind::kPresent80:
      return to_hex(Present80(key).encrypt(parse_hex_u64(vector.plaintext_hex)));
    case BlockCipherKind::kBuggyPresent80:
      return to_hex(BuggyPresent80(key).encrypt(parse_hex_u64(vector.plaintext_hex)));
    case BlockCipherKind::kPrince64:
      return to_hex(Prince64(key).encrypt(parse_hex_u64(vector.plaintext_hex)));
    case BlockCipherKind::kAes128: {
      const std::vector<std::uint8_t> pt = parse_hex_bytes(vector.plaintext_hex);
      if (pt.size() != 16) throw ConfigError("AES-128 plaintext must be 16 bytes");
      Aes128::Block block{};
      std::copy(pt.begin(), pt.end(), block.begin());
      return to_hex(Aes128(key).encrypt(block));
    }
  }
  throw ConfigError("unknown cipher kind");
}

KatReport run_known_answers(BlockCipherKind kind, const std::vector<KnownAnswer>& vectors) {
  KatReport report{kind};
  for (const auto& v : vectors) {
    ++report.total;
    if (evaluate(kind, v) == lower(v.ciphertext_hex)) ++report.matched;
  }
  return report;
}

}  // namespace mirage::ciphers
