#include "betadim/digits.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <sstream>

#include "betadim/error.hpp"

namespace betadim {

bool InfiniteWord::zero_tail() const {
  return std::all_of(period.begin(), period.end(), [](Digit d) { return d == 0; });
}

Digit InfiniteWord::at(std::size_t i) const {
  if (i < prefix.size()) return prefix[i];
  if (period.empty()) return 0;
  return period[(i - prefix.size()) % period.size()];
}

DigitWord InfiniteWord::take(std::size_t n) const {
  DigitWord out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = at(i);
  return out;
}

std::string InfiniteWord::to_string() const {
  std::string s = format_word(prefix, "");
  if (!period.empty()) s += "(" + format_word(period, "") + ")";
  return s;
}

int lex_compare_prefix(std::span<const Digit> a, std::span<const Digit> b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

std::string format_word(std::span<const Digit> w, const char* separator) {
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += separator;
    s += std::to_string(static_cast<int>(w[i]));
  }
  return s;
}

namespace {

DigitWord parse_digit_list(const std::string& text) {
  DigitWord out;
  bool separated = text.find_first_of(", \t") != std::string::npos;
  if (!separated) {
    for (char c : text) {
      if (!std::isdigit(static_cast<unsigned char>(c))) fail(ErrorCode::InvalidArgument, "bad digit '" + std::string(1, c) + "'");
      out.push_back(static_cast<Digit>(c - '0'));
    }
    return out;
  }
  std::string t = text;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream in(t);
  int d;
  while (in >> d) {
    if (d < 0 || d > 255) fail(ErrorCode::InvalidArgument, "digit out of range");
    out.push_back(static_cast<Digit>(d));
  }
  if (!in.eof()) fail(ErrorCode::InvalidArgument, "cannot parse digits '" + text + "'");
  return out;
}

}  // namespace

InfiniteWord parse_infinite_word(const std::string& text) {
  auto open = text.find('(');
  if (open == std::string::npos) return InfiniteWord::finite(parse_digit_list(text));
  auto close = text.find(')', open);
  if (close == std::string::npos || close + 1 != text.size()) fail(ErrorCode::InvalidArgument, "unbalanced period in '" + text + "'");
  InfiniteWord w{parse_digit_list(text.substr(0, open)), parse_digit_list(text.substr(open + 1, close - open - 1))};
  if (w.period.empty()) fail(ErrorCode::InvalidArgument, "empty period");
  return w;
}

DigitWord parse_word(const std::string& text) { return parse_digit_list(text); }

void write_digit_file(std::ostream& out, const DigitFile& file) {
  for (const auto& c : file.comments) out << "# " << c << "\n";
  out << "base=" << file.base << "\n";
  for (std::size_t i = 0; i < file.digits.size(); ++i) {
    out << static_cast<int>(file.digits[i]);
    out << ((i + 1) % 64 == 0 || i + 1 == file.digits.size() ? '\n' : ' ');
  }
}

DigitFile read_digit_file(std::istream& in) {
  DigitFile file;
  std::string line;
  bool have_base = false;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      auto body = line.find_first_not_of(" \t", first + 1);
      file.comments.push_back(body == std::string::npos ? "" : line.substr(body));
      continue;
    }
    if (line.compare(first, 5, "base=") != 0) fail(ErrorCode::InvalidArgument, "digit file must start with base=<b>");
    file.base = std::stoi(line.substr(first + 5));
    if (file.base < 2) fail(ErrorCode::InvalidArgument, "base must be >= 2");
    have_base = true;
    break;
  }
  if (!have_base) fail(ErrorCode::InvalidArgument, "missing base= header");
  int d;
  while (in >> d) {
    if (d < 0 || d >= file.base) fail(ErrorCode::InvalidArgument, "digit " + std::to_string(d) + " outside base");
    file.digits.push_back(static_cast<Digit>(d));
  }
  if (!in.eof()) fail(ErrorCode::InvalidArgument, "non-digit token in digit file");
  return file;
}

}  // namespace betadim
