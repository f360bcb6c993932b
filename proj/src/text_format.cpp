#include "confeval/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace confeval {

std::string fixed(double x, int decimals) {
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  if (decimals < 0 || decimals > 12) throw std::invalid_argument("decimals out of range");
  // Shortest round-trip text first, so 0.0145 is seen as 0.0145 and not as
  // its binary neighbour 0.01449999...
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  const double shown = std::strtod(buf, nullptr);
  const double scale = std::pow(10.0, decimals);
  const double y = std::abs(shown) * scale;
  double whole = std::floor(y);
  const double frac = y - whole;
  if (frac > 0.5 || std::abs(frac - 0.5) <= 1e-9 * std::max(1.0, y)) whole += 1.0;
  double r = std::copysign(whole / scale, shown);
  if (r == 0.0) r = 0.0;  // drop negative zero
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
  return buf;
}

std::string signed_fixed(double x, int decimals) {
  std::string s = fixed(x, decimals);
  if (!s.empty() && s[0] != '-' && std::strtod(s.c_str(), nullptr) != 0.0) s.insert(s.begin(), '+');
  return s;
}

std::string percent(double fraction, int decimals) { return fixed(fraction * 100.0, decimals) + "%"; }

std::string thousands(std::int64_t n) {
  std::string digits = std::to_string(n < 0 ? -n : n);
  std::string out;
  const std::size_t lead = digits.size() % 3;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i != 0 && i >= lead && (i - lead) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return n < 0 ? "-" + out : out;
}

std::string money(double usd) {
  const std::string s = fixed(std::abs(usd), 2);
  const auto dot = s.find('.');
  const std::string whole = thousands(std::stoll(s.substr(0, dot)));
  return std::string(usd < 0 && s != "0.00" ? "-$" : "$") + whole + s.substr(dot);
}

MarkdownTable::MarkdownTable(std::vector<std::string> header, std::vector<Align> align)
    : header_(std::move(header)), align_(std::move(align)) {
  align_.resize(header_.size(), Align::kLeft);
}

void MarkdownTable::add_row(std::vector<std::string> cells) {
  cells.resize(header_.size());
  rows_.push_back(std::move(cells));
}

std::string MarkdownTable::str() const {
  auto line = [](const std::vector<std::string>& cells) {
    std::string s = "|";
    for (const auto& c : cells) s += " " + c + " |";
    return s + "\n";
  };
  std::string out = line(header_);
  out += "|";
  for (auto a : align_) out += a == Align::kRight ? " --: |" : " :-- |";
  out += "\n";
  for (const auto& r : rows_) out += line(r);
  return out;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_escape(fields[i]);
  }
  return out + "\n";
}

}  // namespace confeval
