#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmrope {

// Shortest round-trip decimal rendering; keeps CSV/JSON output
// byte-deterministic across runs.
inline std::string format_double(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw std::runtime_error("double formatting failed");
  return std::string(buf, p);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                          : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

inline std::vector<double> parse_double_row(std::string_view line) {
  std::vector<double> row;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    std::string_view cell = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos
                                                                             : comma - pos);
    double v = 0.0;
    auto first = cell.data();
    auto last = cell.data() + cell.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    auto [p, ec] = std::from_chars(first, last, v);
    while (p != last && (*p == ' ' || *p == '\t')) ++p;
    if (ec != std::errc() || p != last) {
      throw std::runtime_error("invalid number '" + std::string(cell) + "' in CSV row");
    }
    row.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return row;
}

// One vector per line, components as decimal doubles.
inline std::vector<std::vector<double>> parse_vectors_csv(std::string_view text) {
  std::vector<std::vector<double>> out;
  for (std::string_view line : split_lines(text)) out.push_back(parse_double_row(line));
  return out;
}

}  // namespace mmrope
