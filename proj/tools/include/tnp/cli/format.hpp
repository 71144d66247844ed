#pragma once

#include <string>

#include <json.hpp>

namespace tnp::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" otherwise.
std::string format_double(double v);

/// JSON number, or the format_double string for non-finite values.
nlohmann::json json_number(double v);

/// Inverse of format_double; also accepts anything strtod parses fully.
double parse_double(const std::string& text);

}  // namespace tnp::cli
