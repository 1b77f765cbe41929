#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace emscat {

// Shortest decimal that round-trips to the same double.
std::string format_double(double x);
double parse_double(std::string_view s);
long parse_long(std::string_view s);

// Splits one CSV line on commas (no quoting; our files never need it).
std::vector<std::string_view> split_csv(std::string_view line);

// Next line that is neither empty nor a '#' comment; false at end of stream.
bool next_data_line(std::istream& is, std::string& line);

}  // namespace emscat
