#pragma once

#include <string>
#include <string_view>

namespace gradapt {

// Shortest decimal form that parses back to the exact same double; all CSV
// and checkpoint files go through these so round-trips are bit-exact.
std::string format_double(double v);
double parse_double(std::string_view s);

}  // namespace gradapt
