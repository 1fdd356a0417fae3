#include "csv.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "errors.hpp"

namespace revcast::csv {

std::string format_double(double v) {
    std::array<char, 64> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text, const std::string& context) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ValidationError(context + ": not a number: '" + std::string(text) + "'");
    }
    return v;
}

long parse_long(std::string_view text, const std::string& context) {
    long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ValidationError(context + ": not an integer: '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string> split_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::map<std::string, std::string> parse_header_comment(std::string_view line) {
    std::map<std::string, std::string> kv;
    if (line.empty() || line[0] != '#') return kv;
    line.remove_prefix(1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && line[pos] == ' ') ++pos;
        const std::size_t end = line.find(' ', pos);
        const std::string_view token =
            line.substr(pos, end == std::string_view::npos ? line.size() - pos : end - pos);
        const std::size_t eq = token.find('=');
        if (eq != std::string_view::npos && eq > 0) {
            kv.emplace(std::string(token.substr(0, eq)), std::string(token.substr(eq + 1)));
        }
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return kv;
}

std::string render_header_comment(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::string line = "#";
    for (const auto& [k, v] : kv) {
        line += ' ';
        line += k;
        line += '=';
        line += v;
    }
    return line;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace revcast::csv
