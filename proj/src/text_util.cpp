#include "text_util.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "wsi/errors.hpp"

namespace wsi::text {

std::string_view trim(std::string_view s) noexcept {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        const std::string_view line = trim(text.substr(start, end - start));
        start = end + 1;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("line " + std::to_string(line_no) + ": expected key=value, got '" + std::string(line) + "'");
        }
        const std::string_view key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty key");
        out.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
    }
    return out;
}

namespace {
[[noreturn]] void bad_value(std::string_view value, std::string_view key, const char* expected) {
    throw ParseError("invalid " + std::string(expected) + " for '" + std::string(key) + "': '" + std::string(value) + "'");
}
}  // namespace

long long to_int(std::string_view value, std::string_view key) {
    value = trim(value);
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) bad_value(value, key, "integer");
    return out;
}

std::size_t to_size(std::string_view value, std::string_view key) {
    const long long v = to_int(value, key);
    if (v < 0) bad_value(value, key, "non-negative integer");
    return static_cast<std::size_t>(v);
}

double to_double(std::string_view value, std::string_view key) {
    value = trim(value);
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) bad_value(value, key, "number");
    return out;
}

bool to_bool(std::string_view value, std::string_view key) {
    value = trim(value);
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(value, key, "boolean");
}

std::vector<std::size_t> to_size_list(std::string_view value, std::string_view key) {
    std::vector<std::size_t> out;
    if (trim(value).empty()) return out;
    for (const auto& part : split(value, ',')) out.push_back(to_size(part, key));
    return out;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace wsi::text
