#include "rehabkit/textio.hpp"

#include <array>
#include <system_error>

namespace rehabkit::textio {

std::string format_double(double v) {
    std::array<char, 40> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

void write_double(std::ostream& os, double v) { os << format_double(v); }

void write_doubles(std::ostream& os, std::span<const double> v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ' ';
        write_double(os, v[i]);
    }
}

double parse_double(std::string_view token) {
    double v = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw DataError("invalid number: '" + std::string(token) + "'");
    return v;
}

std::int64_t parse_int(std::string_view token) {
    std::int64_t v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw DataError("invalid integer: '" + std::string(token) + "'");
    return v;
}

std::uint64_t parse_u64(std::string_view token) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size())
        throw DataError("invalid unsigned integer: '" + std::string(token) + "'");
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= line.size()) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string expect_line(std::istream& is, const std::string& what) {
    std::string line;
    if (!std::getline(is, line)) throw ModelError("truncated file: expected " + what);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

} // namespace rehabkit::textio
