#include "civic/hex.hpp"

#include <cstdio>

namespace civic {

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  return -1;  // uppercase rejected: canonical form is lowercase only
}

}  // namespace

std::string u64_to_hex(u64 v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%llx", static_cast<unsigned long long>(v));
  return buf;
}

std::optional<u64> hex_to_u64(const std::string& s) {
  if (s.empty() || s.size() > 16) return std::nullopt;
  if (s.size() > 1 && s[0] == '0') return std::nullopt;  // no leading zeros
  u64 v = 0;
  for (char c : s) {
    int d = hex_digit(c);
    if (d < 0) return std::nullopt;
    v = (v << 4) | static_cast<u64>(d);
  }
  return v;
}

std::string bytes_to_hex(const std::uint8_t* data, std::size_t len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (std::size_t i = 0; i < len; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xf]);
  }
  return out;
}

template <std::size_t N>
std::optional<std::array<std::uint8_t, N>> hex_to_bytes(const std::string& s) {
  if (s.size() != 2 * N) return std::nullopt;
  std::array<std::uint8_t, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    int hi = hex_digit(s[2 * i]);
    int lo = hex_digit(s[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

template std::optional<std::array<std::uint8_t, 16>> hex_to_bytes<16>(const std::string&);
template std::optional<std::array<std::uint8_t, 32>> hex_to_bytes<32>(const std::string&);

}  // namespace civic
