#pragma once

#include <string>

namespace palmdpp {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

}  // namespace palmdpp
