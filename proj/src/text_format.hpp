#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace acok::detail {

/// 17 significant digits, enough to reproduce every double bit for bit.
inline std::string format_double(double value) {
  char buf[64];
  const int len = std::snprintf(buf, sizeof(buf), "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

inline bool parse_double(std::string_view text, double& value) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  return res.ec == std::errc() && res.ptr == last;
}

inline bool parse_long(std::string_view text, long& value) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, value);
  return res.ec == std::errc() && res.ptr == last;
}

inline std::string next_token(std::istream& in, const char* context) {
  std::string token;
  if (!(in >> token)) {
    throw std::runtime_error(std::string(context) + ": unexpected end of input");
  }
  return token;
}

inline void expect_token(std::istream& in, std::string_view expected, const char* context) {
  const std::string token = next_token(in, context);
  if (token != expected) {
    throw std::runtime_error(std::string(context) + ": expected '" + std::string(expected) +
                             "', found '" + token + "'");
  }
}

inline double read_double(std::istream& in, const char* context) {
  const std::string token = next_token(in, context);
  double value = 0.0;
  if (!parse_double(token, value)) {
    throw std::runtime_error(std::string(context) + ": bad number '" + token + "'");
  }
  return value;
}

inline long read_long(std::istream& in, const char* context) {
  const std::string token = next_token(in, context);
  long value = 0;
  if (!parse_long(token, value)) {
    throw std::runtime_error(std::string(context) + ": bad integer '" + token + "'");
  }
  return value;
}

}  // namespace acok::detail
