#pragma once

#include <string>

namespace qmst {

// Shortest representation that round-trips exactly; "nan"/"inf" for
// non-finite values. Locale independent, so outputs are byte-stable.
std::string format_double(double v);

// Fixed short label for q values in file names: 1 -> "1", 0.5 -> "0.5".
std::string format_q(double q);

}  // namespace qmst
