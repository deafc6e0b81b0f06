#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace damf {

// Shortest decimal text that parses back to the identical double.
std::string format_exact(double v);

// Six significant digits; ties on the exact binary value round half-to-even.
std::string format_sig6(double v);

// Value of format_sig6(v) parsed back.
double round_sig6(double v);

// Strict full-string parse; accepts "nan"/"inf" spellings produced by format_exact.
std::optional<double> parse_double(std::string_view text);

}  // namespace damf
