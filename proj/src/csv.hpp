#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace revcast::csv {

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

double parse_double(std::string_view text, const std::string& context);
long parse_long(std::string_view text, const std::string& context);

std::vector<std::string> split_line(std::string_view line);

// Leading '# key=value ...' artifact header; empty map when absent.
std::map<std::string, std::string> parse_header_comment(std::string_view line);
std::string render_header_comment(const std::vector<std::pair<std::string, std::string>>& kv);

// FNV-1a, used for config/content provenance hashes.
std::uint64_t fnv1a(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

} // namespace revcast::csv
