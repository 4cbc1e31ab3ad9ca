#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "civic/modmath.hpp"

namespace civic {

// Canonical integer encoding: lowercase hex, big-endian, no leading zeros
// ("0" for zero).
std::string u64_to_hex(u64 v);

// Strict parse of the canonical form above; rejects uppercase, leading
// zeros, empty strings and overflow.
std::optional<u64> hex_to_u64(const std::string& s);

std::string bytes_to_hex(const std::uint8_t* data, std::size_t len);

template <std::size_t N>
std::string bytes_to_hex(const std::array<std::uint8_t, N>& a) {
  return bytes_to_hex(a.data(), N);
}

// Strict parse: exactly 2*N lowercase hex digits.
template <std::size_t N>
std::optional<std::array<std::uint8_t, N>> hex_to_bytes(const std::string& s);

}  // namespace civic
