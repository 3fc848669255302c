#include "agecurve/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <istream>

namespace agecurve::csv {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      // tolerate CRLF input
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Table::Table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return;
  auto header = split_line(line);
  for (size_t i = 0; i < header.size(); ++i) {
    columns_.emplace(header[i], static_cast<int>(i));
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows_.push_back(split_line(line));
  }
}

bool Table::has_column(const std::string& name) const {
  return columns_.count(name) > 0;
}

const std::string& Table::cell(int row, const std::string& name) const {
  static const std::string kEmpty;
  auto it = columns_.find(name);
  if (it == columns_.end()) return kEmpty;
  const auto& r = rows_[static_cast<size_t>(row)];
  if (static_cast<size_t>(it->second) >= r.size()) return kEmpty;
  return r[static_cast<size_t>(it->second)];
}

std::optional<long long> parse_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end == s.c_str() || *end != '\0') return std::nullopt;
  return v;
}

std::optional<double> parse_real(const std::string& s) {
  if (s.empty()) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end == s.c_str() || *end != '\0') return std::nullopt;
  return v;
}

}  // namespace agecurve::csv
