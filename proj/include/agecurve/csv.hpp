// Minimal CSV reading/writing helpers (RFC 4180 quoting, LF line endings).
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace agecurve::csv {

// Splits one physical line into fields, honoring double-quote escaping.
std::vector<std::string> split_line(const std::string& line);

// Quotes a field only when it contains a comma, quote, or newline.
std::string escape(const std::string& field);

// Round-trip exact decimal rendering of a double.
std::string format_double(double v);

// Header-indexed row reader. Lines that fail to parse are reported to the
// caller rather than thrown.
class Table {
 public:
  explicit Table(std::istream& in);

  bool has_column(const std::string& name) const;
  int n_rows() const { return static_cast<int>(rows_.size()); }
  // Empty string when the column is absent or the row is short.
  const std::string& cell(int row, const std::string& name) const;

 private:
  std::unordered_map<std::string, int> columns_;
  std::vector<std::vector<std::string>> rows_;
};

std::optional<long long> parse_int(const std::string& s);
std::optional<double> parse_real(const std::string& s);

}  // namespace agecurve::csv
