#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qe::detail {

std::string_view trim(std::string_view text);
std::string to_lower(std::string_view text);
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view text, std::string_view prefix);

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_alnum(char c) { return is_digit(c) || is_alpha(c); }
inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

struct Line {
  std::size_t offset;  // byte offset of the first character
  std::string_view text;  // without the trailing newline
};

/// Splits on '\n'; a trailing '\r' is kept out of the line text.
std::vector<Line> split_lines(std::string_view text);

/// Shortest decimal that round-trips to `value`.
std::string shortest_decimal(double value);

/// Rounds values within 1e-9 of a multiple of 1e-9 to that multiple, so
/// accumulated grid points print cleanly ("0.3", not "0.30000000000000004").
double tidy(double value);

std::string sha256_hex(std::string_view data);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

std::string read_file(const std::string& path);

/// Offset past a leading list marker ("1.", "2)", "a.", "-", "*", "#") and spaces.
std::size_t skip_list_marker(std::string_view line);

/// If `line` is a header "[marker] Name:" (case-insensitive), the offset just past the colon.
std::optional<std::size_t> header_end(std::string_view line, std::string_view name);

}  // namespace qe::detail
