#ifndef CAVITYQC_FORMAT_HPP
#define CAVITYQC_FORMAT_HPP

#include <cstdio>
#include <string>

namespace cavityqc {

// Fixed 12-significant-digit formatting so repeated runs emit byte-identical
// CSV/JSON artifacts.
inline std::string format_g12(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", value);
    return buf;
}

}  // namespace cavityqc

#endif
