#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mirage {

// Parses an even-length hex string ("0x" prefix optional) into bytes, most
// significant byte first. Throws ConfigError on malformed input.
std::vector<std::uint8_t> parse_hex_bytes(std::string_view text);

// Parses up to 16 hex digits into an integer.
std::uint64_t parse_hex_u64(std::string_view text);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::string to_hex(std::uint64_t value);

}  // namespace mirage
