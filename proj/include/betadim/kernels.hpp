#pragma once

// Hot loops with an OpenMP implementation and a serial reference twin. Both
// produce identical results for every thread count.

#include <cstdint>
#include <span>
#include <vector>

#include "betadim/digits.hpp"

namespace betadim::kernels {

/// A maximal block of one digit. Positions are 1-based as in the digit
/// sequence a_1 a_2 ...: a_{n'} and a_{m'} differ from `digit`, everything
/// strictly between equals it. Incomplete runs touch the end of the word.
struct RawRun {
  std::int64_t n_prime = 0;
  std::int64_t m_prime = 0;
  Digit digit = 0;
  bool complete = true;

  std::int64_t interior() const { return m_prime - n_prime - 1; }
  friend bool operator==(const RawRun&, const RawRun&) = default;
};

enum class ScanMode {
  All,      // every run
  Records,  // only runs with length >= every earlier complete run
};

/// Runs of the digits in `run_digits` (usually {0, b-1}). A run starting at
/// position 1 has no left neighbour and is skipped. The last run is kept (and
/// flagged) if it reaches the end of the word.
std::vector<RawRun> scan_runs_serial(std::span<const Digit> w, std::span<const Digit> run_digits, ScanMode mode);
std::vector<RawRun> scan_runs_parallel(std::span<const Digit> w, std::span<const Digit> run_digits, ScanMode mode);

/// Number of words of length n over {0..top} whose every suffix is <= the
/// equally long prefix of `bound` (bound.size() >= n). Exhaustive.
std::uint64_t count_bounded_words_serial(std::span<const Digit> bound, Digit top, std::size_t n);
std::uint64_t count_bounded_words_parallel(std::span<const Digit> bound, Digit top, std::size_t n);

/// Uniform digits from `alphabet`, reproducible from (seed, absolute index):
/// the stream is cut into fixed chunks, each seeded independently.
void random_fill_serial(std::span<Digit> out, std::span<const Digit> alphabet, std::uint64_t seed);
void random_fill_parallel(std::span<Digit> out, std::span<const Digit> alphabet, std::uint64_t seed);

inline constexpr std::size_t kFillChunk = 1u << 16;

int max_threads();

}  // namespace betadim::kernels
