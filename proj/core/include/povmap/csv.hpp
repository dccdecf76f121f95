#pragma once

// Minimal CSV helpers shared by every file format the library reads or
// writes. Fields are never quoted in these formats.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace povmap::csv {

// Round-trip representation: 17 significant digits, "%.17g".
std::string format_number(double value);

std::vector<std::string> split(std::string_view line, char delimiter = ',');
std::string trim(std::string_view text);

// Strict full-field parse; rejects trailing garbage and empty fields.
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_integer(std::string_view field);

// Reads the next non-blank line, stripping a trailing '\r'. Returns false at EOF.
bool next_line(std::istream& in, std::string& line);

}  // namespace povmap::csv
