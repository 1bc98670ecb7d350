#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the line-oriented formats.
namespace aoipm::text {

// Shortest form that parses back to the same double (17 significant digits).
std::string format_double(double v);

std::optional<double> parse_double(std::string_view token);
std::optional<long long> parse_int(std::string_view token);

// Splits on runs of spaces/tabs; never returns empty tokens.
std::vector<std::string_view> split_ws(std::string_view line);
std::vector<std::string_view> split(std::string_view s, char sep);

// Strips a trailing '#' comment and surrounding whitespace.
std::string_view strip_comment(std::string_view line);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace aoipm::text
