#include "gaugetc/numfmt.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace gaugetc {

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& what) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || token.empty()) {
    throw std::invalid_argument(what + ": cannot parse number '" + token + "'");
  }
  return value;
}

int64_t parse_int(const std::string& token, const std::string& what) {
  int64_t value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end || token.empty()) {
    throw std::invalid_argument(what + ": cannot parse integer '" + token + "'");
  }
  return value;
}

}  // namespace gaugetc
