#include "qmst/format.hpp"

#include <charconv>
#include <cmath>

namespace qmst {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_q(double q) {
    return format_double(q);
}

}  // namespace qmst
