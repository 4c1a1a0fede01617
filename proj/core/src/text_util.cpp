#include "text_util.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "qe/error.hpp"

namespace qe {

UnparseableResponse::UnparseableResponse(std::vector<std::string> diagnostics)
    : Error([&] {
        std::string message = "unparseable judge response";
        for (const auto& d : diagnostics) message += "; " + d;
        return message;
      }()),
      diagnostics_(std::move(diagnostics)) {}

namespace detail {

std::string_view trim(std::string_view text) {
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    char x = a[i], y = b[i];
    if (x >= 'A' && x <= 'Z') x = static_cast<char>(x - 'A' + 'a');
    if (y >= 'A' && y <= 'Z') y = static_cast<char>(y - 'A' + 'a');
    if (x != y) return false;
  }
  return true;
}

bool istarts_with(std::string_view text, std::string_view prefix) {
  return text.size() >= prefix.size() && iequals(text.substr(0, prefix.size()), prefix);
}

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back({start, line});
    if (end == text.size()) break;
    start = end + 1;
  }
  return lines;
}

std::string shortest_decimal(double value) {
  if (value == 0.0) value = 0.0;  // drop negative zero
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw Error("cannot format number");
  return std::string(buf.data(), ptr);
}

double tidy(double value) {
  const double scaled = value * 1e9;
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) < 1e-3) return rounded / 1e9;
  return value;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t skip_list_marker(std::string_view line) {
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  };
  skip_ws();
  std::size_t j = i;
  while (j < line.size() && is_digit(line[j])) ++j;
  if (j > i && j < line.size() && (line[j] == '.' || line[j] == ')') &&
      (j + 1 == line.size() || line[j + 1] == ' ' || line[j + 1] == '\t')) {
    i = j + 1;
  } else if (i + 1 < line.size() && is_alpha(line[i]) && (line[i + 1] == '.' || line[i + 1] == ')') &&
             (i + 2 == line.size() || line[i + 2] == ' ' || line[i + 2] == '\t')) {
    i += 2;
  }
  skip_ws();
  while (i < line.size() && (line[i] == '-' || line[i] == '*' || line[i] == '#' || line[i] == ' ')) ++i;
  return i;
}

std::optional<std::size_t> header_end(std::string_view line, std::string_view name) {
  std::size_t i = skip_list_marker(line);
  if (!istarts_with(line.substr(i), name)) return std::nullopt;
  i += name.size();
  while (i < line.size() && (line[i] == '*' || line[i] == ' ' || line[i] == '\t')) ++i;
  if (i >= line.size() || line[i] != ':') return std::nullopt;
  return i + 1;
}

}  // namespace detail
}  // namespace qe
