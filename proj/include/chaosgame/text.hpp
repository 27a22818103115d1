#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace chaosgame {

/// Shortest-safe text for a double: 17 significant digits, so parse_real
/// recovers the exact value.
std::string format_real(double v);

/// Decimal, scientific or "p/q" fraction. Throws ValidationError.
double parse_real(std::string_view text);

/// Non-negative decimal integer. Throws ValidationError.
unsigned long long parse_unsigned(std::string_view text);
long long parse_integer(std::string_view text);

/// Whitespace-separated reals.
std::vector<double> parse_real_list(std::string_view text);

std::string_view trim(std::string_view s);

/// Splits on `sep`, trimming each piece; empty input yields no pieces.
std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace chaosgame
