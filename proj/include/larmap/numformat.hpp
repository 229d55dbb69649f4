#ifndef LARMAP_NUMFORMAT_HPP
#define LARMAP_NUMFORMAT_HPP

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

#include "larmap/types.hpp"

namespace larmap {

/// Shortest decimal representation that round-trips to the same double.
/// Used for every numeric value we write, so outputs are byte-stable.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_int(long long v) {
  char buf[24];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Strict double parse: the whole token must be consumed.
inline bool try_parse_double(std::string_view s, double& out) {
  // trim ASCII whitespace
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return false;
  size_t e = s.find_last_not_of(" \t\r\n");
  s = s.substr(b, e - b + 1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

inline double parse_double(std::string_view s, const std::string& context) {
  double v;
  if (!try_parse_double(s, v))
    throw ParseError("cannot parse '" + std::string(s) + "' as a number (" + context + ")");
  return v;
}

inline long long parse_int(std::string_view s, const std::string& context) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos)
    throw ParseError("empty integer field (" + context + ")");
  size_t e = s.find_last_not_of(" \t\r\n");
  s = s.substr(b, e - b + 1);
  long long v;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("cannot parse '" + std::string(s) + "' as an integer (" + context + ")");
  return v;
}

}  // namespace larmap

#endif
