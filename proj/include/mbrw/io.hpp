#ifndef MBRW_IO_HPP
#define MBRW_IO_HPP

#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mbrw/error.hpp"

namespace mbrw::io {

/// 17 significant digits; parses back to the same double.
inline std::string format_real(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline double parse_real(const std::string& s)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        fail(ErrorKind::ParseError, "not a number: '" + s + "'");
    }
}

inline unsigned long long parse_unsigned(const std::string& s)
{
    try {
        std::size_t used = 0;
        if (!s.empty() && s.front() == '-') {
            throw std::invalid_argument(s);
        }
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        fail(ErrorKind::ParseError, "not a non-negative integer: '" + s + "'");
    }
}

} // namespace mbrw::io

#endif
