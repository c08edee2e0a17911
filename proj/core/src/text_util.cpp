#include "text_util.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "artic/error.hpp"

namespace artic::text {

std::string format_double(double value) {
  if (value == 0.0) return "0";  // normalize -0
  char buf[32];
  auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::string format_vector3(const Eigen::Vector3d& v) {
  return format_double(v.x()) + " " + format_double(v.y()) + " " +
         format_double(v.z());
}

double parse_double(std::string_view token, std::size_t pos) {
  if (token.empty()) {
    fail_at(errc::bad_number, "empty numeric literal", pos);
  }
  // std::from_chars accepts "inf"/"nan"; the subset does not.
  for (char c : token) {
    if (std::isalpha(static_cast<unsigned char>(c)) && c != 'e' && c != 'E') {
      fail_at(errc::bad_number,
              "non-numeric literal '" + std::string(token) + "'", pos);
    }
  }
  double value = 0.0;
  auto result =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc() || result.ptr != token.data() + token.size()) {
    fail_at(errc::bad_number, "bad numeric literal '" + std::string(token) + "'",
            pos);
  }
  if (!std::isfinite(value)) {
    fail_at(errc::bad_number,
            "non-finite numeric literal '" + std::string(token) + "'", pos);
  }
  return value;
}

Eigen::Vector3d parse_vector3(std::string_view token, std::size_t pos) {
  Eigen::Vector3d out;
  int count = 0;
  std::size_t i = 0;
  while (i < token.size()) {
    while (i < token.size() &&
           std::isspace(static_cast<unsigned char>(token[i]))) {
      ++i;
    }
    if (i >= token.size()) break;
    std::size_t start = i;
    while (i < token.size() &&
           !std::isspace(static_cast<unsigned char>(token[i]))) {
      ++i;
    }
    if (count >= 3) {
      fail_at(errc::bad_number,
              "expected 3 components, got more in '" + std::string(token) + "'",
              pos);
    }
    out[count++] = parse_double(token.substr(start, i - start), pos + start);
  }
  if (count != 3) {
    fail_at(errc::bad_number,
            "expected 3 components in '" + std::string(token) + "'", pos);
  }
  return out;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace artic::text
