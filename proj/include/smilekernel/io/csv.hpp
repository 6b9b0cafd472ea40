#pragma once

// Plain CSV output with round-trip-exact doubles, and a flat key-value reader.

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace smilekernel::io {

/// Shortest text with 17 significant digits, '.' decimal, no grouping.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (res.ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return {buf, res.ptr};
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void header(std::initializer_list<std::string_view> names) {
    bool first = true;
    for (auto n : names) {
      if (!first) os_ << ',';
      os_ << n;
      first = false;
    }
    os_ << '\n';
  }

  /// Starts a row; cells are appended with cell() and closed with end_row().
  CsvWriter& cell(double v) { return raw(format_double(v)); }
  CsvWriter& cell(long long v) { return raw(std::to_string(v)); }
  CsvWriter& cell(std::size_t v) { return raw(std::to_string(v)); }
  CsvWriter& cell(int v) { return raw(std::to_string(v)); }
  CsvWriter& cell(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return raw(std::string(s));
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    q += '"';
    return raw(q);
  }
  CsvWriter& cell(const char* s) { return cell(std::string_view(s)); }

  void end_row() {
    os_ << '\n';
    fresh_ = true;
  }

 private:
  CsvWriter& raw(const std::string& s) {
    if (!fresh_) os_ << ',';
    os_ << s;
    fresh_ = false;
    return *this;
  }

  std::ostream& os_;
  bool fresh_ = true;
};

inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  return os;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Flat `key = value` (or `key: value`) pairs; '#' and ';' start comments,
/// `[section]` lines are ignored.
inline std::map<std::string, std::string> parse_kv(std::istream& is) {
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view s = line;
    if (const auto c = s.find_first_of("#;"); c != std::string_view::npos) s = s.substr(0, c);
    s = trim(s);
    if (s.empty() || s.front() == '[') continue;
    const auto sep = s.find_first_of("=:");
    if (sep == std::string_view::npos) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    }
    out[std::string(trim(s.substr(0, sep)))] = std::string(trim(s.substr(sep + 1)));
  }
  return out;
}

inline std::map<std::string, std::string> read_kv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return parse_kv(is);
}

inline double parse_double(std::string_view s, std::string_view what = "value") {
  s = trim(s);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("cannot parse " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

/// Two-column numeric table (header line optional).
inline std::vector<std::pair<double, double>> read_table(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  std::vector<std::pair<double, double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    const auto s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto comma = s.find(',');
    if (comma == std::string_view::npos) throw std::invalid_argument("read_table: expected two columns");
    try {
      rows.emplace_back(parse_double(s.substr(0, comma)), parse_double(s.substr(comma + 1)));
    } catch (const std::invalid_argument&) {
      if (!first) throw;
    }
    first = false;
  }
  return rows;
}

}  // namespace smilekernel::io
