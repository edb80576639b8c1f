#include "mirage/hex.hpp"

#include "mirage/errors.hpp"

namespace mirage {
namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string_view strip_prefix(std::string_view text) {
  if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    text.remove_prefix(2);
  }
  return text;
}

}  // namespace

std::vector<std::uint8_t> parse_hex_bytes(std::string_view text) {
  text = strip_prefix(text);
  if (text.empty() || text.size() % 2 != 0) {
    throw ConfigError("hex string must have an even, non-zero number of digits: '" +
                      std::string(text) + "'");
  }
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 2);
  for (std::size_t i = 0; i < text.size(); i += 2) {
    const int hi = hex_digit(text[i]);
    const int lo = hex_digit(text[i + 1]);
    if (hi < 0 || lo < 0) throw ConfigError("invalid hex digit in '" + std::string(text) + "'");
    out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
  }
  return out;
}

std::uint64_t parse_hex_u64(std::string_view text) {
  text = strip_prefix(text);
  if (text.empty() || text.size() > 16) {
    throw ConfigError("expected 1..16 hex digits: '" + std::string(text) + "'");
  }
  std::uint64_t v = 0;
  for (char c : text) {
    const int d = hex_digit(c);
    if (d < 0) throw ConfigError("invalid hex digit in '" + std::string(text) + "'");
    v = (v << 4) | static_cast<std::uint64_t>(d);
  }
  return v;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

std::string to_hex(std::uint64_t value) {
  std::uint8_t bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<std::uint8_t>(value >> (56 - 8 * i));
  return to_hex(std::span<const std::uint8_t>(bytes, 8));
}

}  // namespace mirage
