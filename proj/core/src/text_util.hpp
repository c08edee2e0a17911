#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <string_view>

namespace artic::text {

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double value);

std::string format_vector3(const Eigen::Vector3d& v);

/// Strict double scanner: integer, decimal and scientific literals only.
/// NaN/Inf/hex/empty/trailing garbage are rejected with errc::bad_number at
/// `pos` (byte offset used for diagnostics only).
double parse_double(std::string_view token, std::size_t pos);

/// Whitespace-separated triple, e.g. "0 0 1".
Eigen::Vector3d parse_vector3(std::string_view token, std::size_t pos);

std::string to_lower(std::string_view s);

}  // namespace artic::text
