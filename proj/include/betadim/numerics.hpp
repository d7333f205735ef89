#pragma once

// Certified real arithmetic: dyadic intervals with outward rounding, exact
// rational polynomials, and isolated real roots of expansion polynomials.

#include <gmpxx.h>
#include <mpfr.h>

#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace betadim {

using Integer = mpz_class;
using Rational = mpq_class;

inline constexpr long kDefaultPrecision = 256;

/// Precision used when the caller does not pass one. Reads BETADIM_PRECISION
/// once; falls back to kDefaultPrecision.
long default_precision();

/// Owning wrapper around an mpfr_t.
class BigFloat {
 public:
  explicit BigFloat(long precision = kDefaultPrecision);
  BigFloat(const BigFloat& other);
  BigFloat(BigFloat&& other) noexcept;
  BigFloat& operator=(const BigFloat& other);
  BigFloat& operator=(BigFloat&& other) noexcept;
  ~BigFloat();

  static BigFloat from_rational(const Rational& q, long precision, mpfr_rnd_t rnd);

  mpfr_ptr get() { return value_; }
  mpfr_srcptr get() const { return value_; }
  long precision() const { return static_cast<long>(mpfr_get_prec(value_)); }
  double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
  std::string to_string(int significant_digits = 20) const;
  /// Exact value; BigFloat is always dyadic.
  Rational to_rational() const;

 private:
  mpfr_t value_;
};

enum class Ordering { Less, Greater, Unresolved };

/// A closed interval [lower, upper] with dyadic endpoints that encloses one
/// real number. When the interval knows how it was produced (a rational, a
/// polynomial root, or arithmetic on such values) it can be refined.
class Scalar {
 public:
  using Refiner = std::function<Scalar(long target_bits)>;

  Scalar();
  Scalar(BigFloat lower, BigFloat upper, std::shared_ptr<const Refiner> refiner = nullptr);

  static Scalar from_rational(const Rational& q, long precision_bits = kDefaultPrecision);
  static Scalar from_integer(long value) { return from_rational(Rational(value)); }

  const BigFloat& lower() const { return lower_; }
  const BigFloat& upper() const { return upper_; }
  long precision_bits() const { return std::max(lower_.precision(), upper_.precision()); }
  bool refinable() const { return static_cast<bool>(refiner_); }
  bool is_point() const;

  /// Same real number, width <= 2^-target_bits. Throws PrecisionExhausted if
  /// the value has no defining expression and is already too wide.
  Scalar refine(long target_bits) const;

  bool width_at_most(long bits) const;
  /// floor(log2(width)), or a very negative number for a point interval.
  long width_log2() const;
  /// Binary exponent of max(|lower|, |upper|) (0 for zero).
  long magnitude_log2() const;

  bool contains(const Rational& q) const;
  double midpoint() const;
  Rational midpoint_rational() const;

  Scalar operator-() const;
  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  friend Scalar operator/(const Scalar& a, const Scalar& b);

  Scalar pow(unsigned long exponent) const;
  /// Natural logarithm; requires a strictly positive enclosure.
  Scalar log() const;

  std::string to_string(int significant_digits = 20) const;

 private:
  BigFloat lower_;
  BigFloat upper_;
  std::shared_ptr<const Refiner> refiner_;
};

/// Less/Greater only when the whole interval lies strictly on one side.
Ordering compare_with_certification(const Scalar& x, const Rational& threshold);

/// Refines x (doubling precision up to max_bits) until the comparison
/// resolves; returns Unresolved only if x equals the threshold or cannot be
/// refined further.
Ordering compare_refining(const Scalar& x, const Rational& threshold, long max_bits = 1L << 14);

/// Certified a < b (true), a > b (false), nullopt if the intervals overlap
/// after refinement to max_bits.
std::optional<bool> certified_less(const Scalar& a, const Scalar& b, long max_bits = 1L << 12);

/// Dense polynomial with rational coefficients, coefficient i multiplies z^i.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Rational> coefficients);

  static Polynomial monomial(const Rational& c, std::size_t degree);
  static Polynomial constant(const Rational& c) { return monomial(c, 0); }

  bool is_zero() const { return coeffs_.empty(); }
  /// -1 for the zero polynomial.
  long degree() const { return static_cast<long>(coeffs_.size()) - 1; }
  const std::vector<Rational>& coefficients() const { return coeffs_; }
  Rational coefficient(std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : Rational(0); }
  const Rational& leading() const { return coeffs_.back(); }

  Rational evaluate(const Rational& z) const;
  Scalar evaluate(const Scalar& z) const;
  /// Sign of P(num / 2^exponent) using integer arithmetic only.
  int sign_at_dyadic(const Integer& num, unsigned long exponent) const;
  int sign_at(const Rational& z) const;

  Polynomial operator-() const;
  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.coeffs_ == b.coeffs_; }

  Polynomial shifted(std::size_t k) const;  // times z^k
  Polynomial monic() const;
  /// Quotient and remainder of Euclidean division.
  std::pair<Polynomial, Polynomial> divmod(const Polynomial& divisor) const;
  Polynomial mod(const Polynomial& divisor) const { return divmod(divisor).second; }

  std::string to_string() const;

 private:
  void trim();
  std::vector<Rational> coeffs_;
};

/// Monic gcd over Q.
Polynomial gcd(Polynomial a, Polynomial b);

/// Coefficients of a series 1 = sum_i c_i z^{-i}: a finite prefix followed by
/// an optional period repeated forever. An empty period means a zero tail.
struct ExpansionSeries {
  std::vector<Rational> prefix;
  std::vector<Rational> period;

  /// Polynomial whose sign on (1, inf) equals the sign of 1 - sum c_i z^{-i}.
  Polynomial cleared_polynomial() const;
  std::string to_string() const;
};

/// A real algebraic number given by a polynomial and an isolating bracket
/// (sign change, exactly one root inside). Brackets are shared between copies
/// and shrink monotonically, so refinement work is never repeated.
class PolyRoot {
 public:
  static PolyRoot from_rational(const Rational& q);
  /// Root of `poly` in [lo, hi]; caller guarantees at most one root there.
  static PolyRoot from_polynomial(Polynomial poly, const Rational& lo, const Rational& hi);
  static PolyRoot from_series(const ExpansionSeries& series, long precision_bits = kDefaultPrecision);

  const Polynomial& polynomial() const { return state_->poly; }
  const std::optional<ExpansionSeries>& series() const { return state_->series; }
  std::pair<Rational, Rational> bracket() const;
  std::optional<Rational> exact() const;

  /// Enclosure of width <= 2^-bits; refinable further.
  Scalar value(long bits = kDefaultPrecision) const;
  Scalar refined(long bits) const { return value(bits); }

  /// True iff the root is a root of q (exact test via gcd and a sign change
  /// on the isolating bracket).
  bool is_root_of(const Polynomial& q) const;

 private:
  struct State {
    Polynomial poly;
    std::optional<ExpansionSeries> series;
    mutable std::mutex mutex;
    Rational lo, hi;
    int sign_lo = 0;
    bool exact = false;
  };
  explicit PolyRoot(std::shared_ptr<State> s) : state_(std::move(s)) {}
  friend PolyRoot isolate_root(const std::vector<Rational>&, const std::pair<Rational, Rational>&, long);
  static void bisect_to(State& s, long bits);
  std::shared_ptr<State> state_;
};

/// Root > 1 of z -> 1 - sum c_i z^{-i} inside `search`.
/// Errors: DegenerateApproximant if the root is <= 1, NoRoot without a sign
/// change on the search interval.
PolyRoot isolate_root(const std::vector<Rational>& coefficients,
                      const std::pair<Rational, Rational>& search,
                      long precision_bits = kDefaultPrecision);

/// Parse "p/q", "p" or a decimal like "0.25" exactly.
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);

}  // namespace betadim
