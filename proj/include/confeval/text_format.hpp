#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace confeval {

/// Fixed-point rendering with round-half-away-from-zero on the decimal
/// value, so 0.0145 prints as 0.0145 at 4 places and -0.0 never appears.
std::string fixed(double x, int decimals);
std::string signed_fixed(double x, int decimals);  // leading '+' for positives
std::string percent(double fraction, int decimals);  // 0.359 -> "35.9%"
std::string money(double usd);                      // "$1,234.57"
std::string thousands(std::int64_t n);              // 170623 -> "170,623"

/// Pipe table. Column alignment is ':--' for left and '--:' for right.
class MarkdownTable {
 public:
  enum class Align { kLeft, kRight };

  explicit MarkdownTable(std::vector<std::string> header, std::vector<Align> align = {});
  void add_row(std::vector<std::string> cells);
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<Align> align_;
  std::vector<std::vector<std::string>> rows_;
};

std::string csv_escape(std::string_view field);
std::string csv_line(const std::vector<std::string>& fields);

}  // namespace confeval
