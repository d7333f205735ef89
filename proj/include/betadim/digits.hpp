#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace betadim {

using Digit = std::uint8_t;
using DigitWord = std::vector<Digit>;

/// prefix followed by period repeated forever; an empty period is a zero tail.
struct InfiniteWord {
  DigitWord prefix;
  DigitWord period;

  static InfiniteWord finite(DigitWord w) { return {std::move(w), {}}; }
  static InfiniteWord periodic(DigitWord p) { return {{}, std::move(p)}; }

  bool zero_tail() const;
  Digit at(std::size_t i) const;
  DigitWord take(std::size_t n) const;
  /// Length after which the word is known to repeat (prefix + one period).
  std::size_t horizon() const { return prefix.size() + period.size(); }
  std::string to_string() const;
};

/// -1, 0, 1 comparing a and b over their common length.
int lex_compare_prefix(std::span<const Digit> a, std::span<const Digit> b);

std::string format_word(std::span<const Digit> w, const char* separator = " ");
/// Accepts "1 0 1", "1,0,1", "101" (single-digit form) and an optional
/// parenthesised period: "1(10)".
InfiniteWord parse_infinite_word(const std::string& text);
DigitWord parse_word(const std::string& text);

/// Digit-sequence file: optional '#' comment lines, then `base=<b>`, then
/// whitespace-separated digits.
struct DigitFile {
  int base = 10;
  DigitWord digits;
  std::vector<std::string> comments;
};

void write_digit_file(std::ostream& out, const DigitFile& file);
DigitFile read_digit_file(std::istream& in);

}  // namespace betadim
