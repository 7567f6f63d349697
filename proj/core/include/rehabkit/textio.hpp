#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rehabkit/errors.hpp"

namespace rehabkit::textio {

/// Shortest decimal form that round-trips to the same double. All text
/// formats use this so serialized artifacts are byte-stable and exact.
std::string format_double(double v);

void write_double(std::ostream& os, double v);
void write_doubles(std::ostream& os, std::span<const double> v); // space-separated

double parse_double(std::string_view token);
std::int64_t parse_int(std::string_view token);
std::uint64_t parse_u64(std::string_view token);

/// Splits on single spaces (no empty tokens expected).
std::vector<std::string_view> split(std::string_view line, char sep = ' ');

/// Reads one line; throws ModelError mentioning `what` on EOF.
std::string expect_line(std::istream& is, const std::string& what);

} // namespace rehabkit::textio
