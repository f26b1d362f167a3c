#pragma once

#include <string>

namespace conclab {

// Shortest decimal that round-trips to the same double; "inf"/"-inf"/"nan"
// for non-finite values.
std::string format_double(double x);
double parse_double(const std::string& s);

}  // namespace conclab
