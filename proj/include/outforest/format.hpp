#pragma once

#include <charconv>
#include <cstddef>
#include <string>
#include <system_error>

namespace outforest {

// Shortest decimal that round-trips to the same double.
inline std::string format_double(double value) {
    char buffer[64];
    auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, end);
}

// 17 significant digits; enough to reproduce the double exactly, fixed width
// of information for CSV consumers.
inline std::string format_double_17(double value) {
    char buffer[64];
    auto [end, ec] =
        std::to_chars(buffer, buffer + sizeof(buffer), value, std::chars_format::general, 17);
    return std::string(buffer, end);
}

}  // namespace outforest
