#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace depsentry::testing {

/// Brute-force Shannon entropy: one pass over the input per possible byte value.
inline double oracle_entropy(std::string_view s) {
  if (s.empty()) return 0.0;
  double h = 0.0;
  for (int v = 0; v < 256; ++v) {
    std::size_t n = 0;
    for (unsigned char c : s) n += c == v;
    if (n == 0) continue;
    const double p = static_cast<double>(n) / static_cast<double>(s.size());
    h -= p * std::log2(p);
  }
  return h;
}

/// RFC 4648 base64 with padding, written out bit by bit.
inline std::string oracle_base64(std::string_view in) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string bits;
  for (unsigned char c : in)
    for (int b = 7; b >= 0; --b) bits.push_back(((c >> b) & 1) ? '1' : '0');
  while (bits.size() % 6) bits.push_back('0');
  std::string out;
  for (std::size_t i = 0; i < bits.size(); i += 6) out.push_back(kAlphabet[std::stoi(bits.substr(i, 6), nullptr, 2)]);
  while (out.size() % 4) out.push_back('=');
  return out;
}

inline std::string oracle_hex(std::string_view in) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (unsigned char c : in) {
    out.push_back(kDigits[c / 16]);
    out.push_back(kDigits[c % 16]);
  }
  return out;
}

inline bool oracle_printable(unsigned char c) { return (c >= 32 && c < 127) || c == 9 || c == 10 || c == 13; }

inline double oracle_printable_fraction(std::string_view s) {
  if (s.empty()) return 0.0;
  std::size_t n = 0;
  for (unsigned char c : s) n += oracle_printable(c);
  return static_cast<double>(n) / static_cast<double>(s.size());
}

}  // namespace depsentry::testing
