#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "betadim/digits.hpp"
#include "betadim/numerics.hpp"

namespace betadim {

/// First n digits of p/q in base b by long division (finite expansions end in
/// zeros). Requires 0 <= p < q.
DigitWord expand_rational(const Integer& p, const Integer& q, unsigned b, std::size_t n);

/// Sum over j >= 1 of b^{-floor((1+v)^j)}, or of b^{-2^{j^2}}.
struct LacunaryRule {
  enum class Kind { Power, SquaredPower };
  Kind kind = Kind::Power;
  Rational v = 1;

  static LacunaryRule power(Rational v) { return {Kind::Power, std::move(v)}; }
  static LacunaryRule squared_power() { return {Kind::SquaredPower, 0}; }
};

/// Positions carrying a one, with multiplicity when (1+v)^j repeats a floor.
/// Colliding terms are added with carries, so the result is the true
/// expansion of the fractional part of the series.
DigitWord expand_lacunary(unsigned b, const LacunaryRule& rule, std::size_t n);

struct BaryExpansion {
  unsigned base = 10;
  DigitWord digits;
  std::string source;

  static BaryExpansion rational(const Integer& p, const Integer& q, unsigned b, std::size_t n);
  static BaryExpansion lacunary(unsigned b, const LacunaryRule& rule, std::size_t n);
  static BaryExpansion explicit_digits(unsigned b, DigitWord digits);
};

enum class RunKind { Zeros, Top };

/// a_{n'} and a_{m'} bound a maximal block of zeros (or of b-1); positions are
/// 1-based. A block starting at position 1 has no left bound and is dropped.
struct Run {
  std::int64_t n_prime = 0;
  std::int64_t m_prime = 0;
  RunKind kind = RunKind::Zeros;
  bool complete = true;

  std::int64_t interior() const { return m_prime - n_prime - 1; }
  std::int64_t span() const { return m_prime - n_prime; }
  friend bool operator==(const Run&, const Run&) = default;
};

struct MonotoneRun {
  std::int64_t n = 0;
  std::int64_t m = 0;
  std::size_t run = 0;  // index into RunDecomposition::runs
};

struct RunDecomposition {
  unsigned base = 2;
  std::int64_t horizon = 0;
  std::vector<Run> runs;
  std::vector<MonotoneRun> monotone;
  bool records_only = false;  // runs holds only the record runs
};

struct RunOptions {
  /// Keep only runs that can enter the monotone subsequence. Needed for words
  /// of tens of millions of digits.
  bool records_only = false;
  bool zeros_only = false;
  bool parallel = true;
};

RunDecomposition run_decomposition(std::span<const Digit> digits, unsigned b, RunOptions options = {});

/// Greedy j_{k+1} = min{ j > j_k : m'_j - n'_j >= m_k - n_k } over the
/// complete runs.
std::vector<MonotoneRun> monotone_subsequence(std::span<const Run> runs);

/// Digits not strictly inside any run, in order.
DigitWord outside_digits(const RunDecomposition& dec, std::span<const Digit> digits);
/// Rebuilds the word from the runs and the digits outside them.
DigitWord reconstruct(const RunDecomposition& dec, std::span<const Digit> outside);

struct TrajectoryPoint {
  std::size_t k = 0;  // 1-based
  Rational v_ratio;   // (m_k - n_k) / n_k
  std::optional<Rational> v_hat_ratio;  // (m_k - n_k) / n_{k+1}
};

struct ExponentEstimate {
  Rational v_lower;
  Rational v_hat_lower;
  std::vector<TrajectoryPoint> trajectory;
  std::int64_t horizon = 0;
  std::size_t window = 0;
  double k_over_log_n = 0;  // empirical constant in k <= C log n_k
  bool degenerate = false;  // no runs: both exponents reported 0
};

ExponentEstimate estimate_exponents(const RunDecomposition& dec, std::optional<std::size_t> window = {});

/// Runs the decomposition and the estimate; words with no runs or a single
/// record give zero exponents flagged degenerate instead of an error.
ExponentEstimate estimate_from_digits(std::span<const Digit> digits, unsigned b, RunOptions options = {});

struct RelationReport {
  bool v_hat_le_v = false;
  bool v_hat_le_v_over_1pv = false;
  bool v_ge_v_hat_over_1mv_hat = false;
  bool all() const { return v_hat_le_v && v_hat_le_v_over_1pv && v_ge_v_hat_over_1mv_hat; }
};

RelationReport check_relations(const Rational& v, const Rational& v_hat, const Rational& tol = 0);
RelationReport check_relations(const ExponentEstimate& est, const Rational& tol = 0);

struct DigitSet {
  unsigned base = 3;
  std::vector<Digit> digits;  // sorted, distinct

  /// InvalidDigitSet unless b >= 3, |S| >= 2, S within {0..b-1} and S holds 0
  /// or b-1.
  static DigitSet make(unsigned b, std::vector<unsigned> s);
  bool contains(Digit d) const;
  std::string to_string() const;
};

}  // namespace betadim
