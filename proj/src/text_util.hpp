#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wsi::text {

std::string_view trim(std::string_view s) noexcept;
std::vector<std::string> split(std::string_view s, char sep);

// key=value lines; blank lines and lines starting with '#' are skipped.
// Throws ParseError on a line without '=' or with an empty key.
std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

std::size_t to_size(std::string_view value, std::string_view key);
long long to_int(std::string_view value, std::string_view key);
double to_double(std::string_view value, std::string_view key);
bool to_bool(std::string_view value, std::string_view key);
std::vector<std::size_t> to_size_list(std::string_view value, std::string_view key);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace wsi::text
