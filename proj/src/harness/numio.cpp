#include "gradapt/numio.hpp"

#include <charconv>
#include <stdexcept>
#include <system_error>

namespace gradapt {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("parse_double: bad number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace gradapt
