#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gin::io {

// Shortest decimal text that parses back to the same value.
std::string format_number(double v);
std::string format_number(float v);

std::vector<std::string> split_csv_line(std::string_view line);

double parse_double(std::string_view s, std::string_view context);
long long parse_int(std::string_view s, std::string_view context);

}  // namespace gin::io
