#include "betadim/numerics.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "betadim/error.hpp"

namespace betadim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::DegenerateApproximant: return "DegenerateApproximant";
    case ErrorCode::NoRuns: return "NoRuns";
    case ErrorCode::InsufficientDepth: return "InsufficientDepth";
    case ErrorCode::InfeasibleParameters: return "InfeasibleParameters";
    case ErrorCode::UndecidedFiniteness: return "UndecidedFiniteness";
    case ErrorCode::HorizonTooDeep: return "HorizonTooDeep";
    case ErrorCode::NotSelfAdmissible: return "NotSelfAdmissible";
    case ErrorCode::PrefixConditionFailed: return "PrefixConditionFailed";
    case ErrorCode::InvalidDigitSet: return "InvalidDigitSet";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::NotInSupport: return "NotInSupport";
  }
  return "Unknown";
}

long default_precision() {
  static const long value = [] {
    if (const char* env = std::getenv("BETADIM_PRECISION")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && v >= 16) return v;
    }
    return kDefaultPrecision;
  }();
  return value;
}

// ---------------------------------------------------------------- BigFloat

BigFloat::BigFloat(long precision) {
  mpfr_init2(value_, std::max<long>(precision, MPFR_PREC_MIN));
  mpfr_set_zero(value_, 1);
}

BigFloat::BigFloat(const BigFloat& other) {
  mpfr_init2(value_, mpfr_get_prec(other.value_));
  mpfr_set(value_, other.value_, MPFR_RNDN);
}

BigFloat::BigFloat(BigFloat&& other) noexcept {
  // mpfr_t is an array type; swap into a fresh minimal value.
  mpfr_init2(value_, MPFR_PREC_MIN);
  mpfr_swap(value_, other.value_);
}

BigFloat& BigFloat::operator=(const BigFloat& other) {
  if (this != &other) {
    mpfr_set_prec(value_, mpfr_get_prec(other.value_));
    mpfr_set(value_, other.value_, MPFR_RNDN);
  }
  return *this;
}

BigFloat& BigFloat::operator=(BigFloat&& other) noexcept {
  if (this != &other) mpfr_swap(value_, other.value_);
  return *this;
}

BigFloat::~BigFloat() { mpfr_clear(value_); }

BigFloat BigFloat::from_rational(const Rational& q, long precision, mpfr_rnd_t rnd) {
  BigFloat out(precision);
  mpfr_set_q(out.value_, q.get_mpq_t(), rnd);
  return out;
}

std::string BigFloat::to_string(int significant_digits) const {
  if (mpfr_zero_p(value_)) return "0";
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.*Rg", significant_digits, value_);
  std::string s(buf);
  mpfr_free_str(buf);
  return s;
}

Rational BigFloat::to_rational() const {
  if (mpfr_zero_p(value_)) return 0;
  Integer mant;
  mpfr_exp_t e = mpfr_get_z_2exp(mant.get_mpz_t(), value_);
  Rational q(mant);
  if (e >= 0) {
    mpz_mul_2exp(q.get_num_mpz_t(), q.get_num_mpz_t(), static_cast<mp_bitcnt_t>(e));
  } else {
    mpz_mul_2exp(q.get_den_mpz_t(), q.get_den_mpz_t(), static_cast<mp_bitcnt_t>(-e));
  }
  q.canonicalize();
  return q;
}

// ---------------------------------------------------------------- Scalar

namespace {

long exponent_of(mpfr_srcptr x) {
  if (mpfr_zero_p(x)) return 0;
  return static_cast<long>(mpfr_get_exp(x));
}

using RawOp = Scalar (*)(const Scalar&, const Scalar&, long);

Scalar raw_add(const Scalar& a, const Scalar& b, long prec) {
  BigFloat lo(prec), hi(prec);
  mpfr_add(lo.get(), a.lower().get(), b.lower().get(), MPFR_RNDD);
  mpfr_add(hi.get(), a.upper().get(), b.upper().get(), MPFR_RNDU);
  return Scalar(std::move(lo), std::move(hi));
}

Scalar raw_sub(const Scalar& a, const Scalar& b, long prec) {
  BigFloat lo(prec), hi(prec);
  mpfr_sub(lo.get(), a.lower().get(), b.upper().get(), MPFR_RNDD);
  mpfr_sub(hi.get(), a.upper().get(), b.lower().get(), MPFR_RNDU);
  return Scalar(std::move(lo), std::move(hi));
}

Scalar raw_mul(const Scalar& a, const Scalar& b, long prec) {
  BigFloat lo(prec), hi(prec), t(prec);
  mpfr_srcptr as[2] = {a.lower().get(), a.upper().get()};
  mpfr_srcptr bs[2] = {b.lower().get(), b.upper().get()};
  bool first = true;
  for (auto x : as) {
    for (auto y : bs) {
      mpfr_mul(t.get(), x, y, MPFR_RNDD);
      if (first || mpfr_less_p(t.get(), lo.get())) mpfr_set(lo.get(), t.get(), MPFR_RNDD);
      mpfr_mul(t.get(), x, y, MPFR_RNDU);
      if (first || mpfr_greater_p(t.get(), hi.get())) mpfr_set(hi.get(), t.get(), MPFR_RNDU);
      first = false;
    }
  }
  return Scalar(std::move(lo), std::move(hi));
}

Scalar raw_div(const Scalar& a, const Scalar& b, long prec) {
  if (mpfr_sgn(b.lower().get()) <= 0 && mpfr_sgn(b.upper().get()) >= 0) {
    fail(ErrorCode::PrecisionExhausted, "divisor interval contains zero");
  }
  BigFloat lo(prec), hi(prec), t(prec);
  mpfr_srcptr as[2] = {a.lower().get(), a.upper().get()};
  mpfr_srcptr bs[2] = {b.lower().get(), b.upper().get()};
  bool first = true;
  for (auto x : as) {
    for (auto y : bs) {
      mpfr_div(t.get(), x, y, MPFR_RNDD);
      if (first || mpfr_less_p(t.get(), lo.get())) mpfr_set(lo.get(), t.get(), MPFR_RNDD);
      mpfr_div(t.get(), x, y, MPFR_RNDU);
      if (first || mpfr_greater_p(t.get(), hi.get())) mpfr_set(hi.get(), t.get(), MPFR_RNDU);
      first = false;
    }
  }
  return Scalar(std::move(lo), std::move(hi));
}

// Refiner for op(a, b): refine both operands with a growing guard until the
// result is narrow enough.
std::shared_ptr<const Scalar::Refiner> compose(const Scalar& a, const Scalar& b, RawOp op) {
  if (!a.refinable() && !b.refinable()) return nullptr;
  return std::make_shared<const Scalar::Refiner>([a, b, op](long bits) {
    long guard = 8 + std::max(a.magnitude_log2(), 0L) + std::max(b.magnitude_log2(), 0L);
    if (op == &raw_div) guard += 2 * std::max(-b.magnitude_log2(), 0L) + 4;
    for (int attempt = 0; attempt < 8; ++attempt) {
      long inner = bits + guard;
      Scalar ra = a.width_at_most(inner) ? a : a.refine(inner);
      Scalar rb = b.width_at_most(inner) ? b : b.refine(inner);
      Scalar r = op(ra, rb, inner + 16);
      if (r.width_at_most(bits)) return r;
      guard *= 2;
    }
    fail(ErrorCode::PrecisionExhausted, "composed refinement did not converge");
  });
}

Scalar apply(const Scalar& a, const Scalar& b, RawOp op) {
  long prec = std::max(a.precision_bits(), b.precision_bits());
  Scalar r = op(a, b, prec);
  auto refiner = compose(a, b, op);
  return Scalar(r.lower(), r.upper(), std::move(refiner));
}

}  // namespace

Scalar::Scalar() : lower_(64), upper_(64) {}

Scalar::Scalar(BigFloat lower, BigFloat upper, std::shared_ptr<const Refiner> refiner)
    : lower_(std::move(lower)), upper_(std::move(upper)), refiner_(std::move(refiner)) {
  if (mpfr_greater_p(lower_.get(), upper_.get())) {
    fail(ErrorCode::InvalidArgument, "interval with lower > upper");
  }
}

Scalar Scalar::from_rational(const Rational& q, long precision_bits) {
  auto make = [q](long prec) {
    return Scalar(BigFloat::from_rational(q, prec, MPFR_RNDD), BigFloat::from_rational(q, prec, MPFR_RNDU));
  };
  long mag = static_cast<long>(mpz_sizeinbase(q.get_num_mpz_t(), 2));
  Scalar base = make(std::max(precision_bits, mag + 8));
  if (base.is_point()) return base;
  auto refiner = std::make_shared<const Refiner>([q, make, mag](long bits) {
    return make(std::max(bits, 0L) + mag + 8);
  });
  return Scalar(base.lower_, base.upper_, std::move(refiner));
}

bool Scalar::is_point() const { return mpfr_equal_p(lower_.get(), upper_.get()) != 0; }

Scalar Scalar::refine(long target_bits) const {
  if (width_at_most(target_bits)) return *this;
  if (!refiner_) {
    fail(ErrorCode::PrecisionExhausted,
         "interval of width 2^" + std::to_string(width_log2()) + " has no defining expression");
  }
  Scalar r = (*refiner_)(target_bits);
  if (!r.width_at_most(target_bits)) fail(ErrorCode::PrecisionExhausted, "refinement fell short");
  return Scalar(r.lower_, r.upper_, refiner_);
}

bool Scalar::width_at_most(long bits) const {
  if (is_point()) return true;
  BigFloat w(precision_bits() + 2);
  mpfr_sub(w.get(), upper_.get(), lower_.get(), MPFR_RNDU);
  return mpfr_cmp_ui_2exp(w.get(), 1, -bits) <= 0;
}

long Scalar::width_log2() const {
  if (is_point()) return -(1L << 40);
  BigFloat w(precision_bits() + 2);
  mpfr_sub(w.get(), upper_.get(), lower_.get(), MPFR_RNDU);
  return exponent_of(w.get()) - 1;
}

long Scalar::magnitude_log2() const {
  return std::max(exponent_of(lower_.get()), exponent_of(upper_.get()));
}

bool Scalar::contains(const Rational& q) const {
  return mpfr_cmp_q(lower_.get(), q.get_mpq_t()) <= 0 && mpfr_cmp_q(upper_.get(), q.get_mpq_t()) >= 0;
}

double Scalar::midpoint() const { return 0.5 * (lower_.to_double() + upper_.to_double()); }

Rational Scalar::midpoint_rational() const { return (lower_.to_rational() + upper_.to_rational()) / 2; }

Scalar Scalar::operator-() const {
  BigFloat lo(upper_.precision()), hi(lower_.precision());
  mpfr_neg(lo.get(), upper_.get(), MPFR_RNDD);
  mpfr_neg(hi.get(), lower_.get(), MPFR_RNDU);
  std::shared_ptr<const Refiner> r;
  if (refiner_) {
    auto inner = refiner_;
    r = std::make_shared<const Refiner>([inner](long bits) { return -(*inner)(bits); });
  }
  return Scalar(std::move(lo), std::move(hi), std::move(r));
}

Scalar operator+(const Scalar& a, const Scalar& b) { return apply(a, b, &raw_add); }
Scalar operator-(const Scalar& a, const Scalar& b) { return apply(a, b, &raw_sub); }
Scalar operator*(const Scalar& a, const Scalar& b) { return apply(a, b, &raw_mul); }
Scalar operator/(const Scalar& a, const Scalar& b) { return apply(a, b, &raw_div); }

Scalar Scalar::pow(unsigned long exponent) const {
  Scalar result = Scalar::from_integer(1);
  Scalar base = *this;
  while (exponent > 0) {
    if (exponent & 1UL) result = result * base;
    exponent >>= 1;
    if (exponent > 0) base = base * base;
  }
  return result;
}

namespace {

Scalar raw_log(const Scalar& x, long prec) {
  if (mpfr_sgn(x.lower().get()) <= 0) fail(ErrorCode::PrecisionExhausted, "log of an interval reaching zero");
  BigFloat lo(prec), hi(prec);
  mpfr_log(lo.get(), x.lower().get(), MPFR_RNDD);
  mpfr_log(hi.get(), x.upper().get(), MPFR_RNDU);
  return Scalar(std::move(lo), std::move(hi));
}

}  // namespace

Scalar Scalar::log() const {
  Scalar r = raw_log(*this, precision_bits());
  if (!refiner_) return r;
  Scalar self = *this;
  auto refiner = std::make_shared<const Refiner>([self](long bits) {
    // |log'(x)| = 1/x, so the operand needs extra bits when x is small.
    long guard = 8 + std::max(-self.magnitude_log2(), 0L) + 2;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Scalar x = self.refine(bits + guard);
      Scalar out = raw_log(x, bits + guard + 16);
      if (out.width_at_most(bits)) return out;
      guard *= 2;
    }
    fail(ErrorCode::PrecisionExhausted, "log refinement did not converge");
  });
  return Scalar(r.lower(), r.upper(), std::move(refiner));
}

std::string Scalar::to_string(int significant_digits) const {
  return "[" + lower_.to_string(significant_digits) + ", " + upper_.to_string(significant_digits) + "]";
}

Ordering compare_with_certification(const Scalar& x, const Rational& threshold) {
  if (mpfr_cmp_q(x.upper().get(), threshold.get_mpq_t()) < 0) return Ordering::Less;
  if (mpfr_cmp_q(x.lower().get(), threshold.get_mpq_t()) > 0) return Ordering::Greater;
  return Ordering::Unresolved;
}

Ordering compare_refining(const Scalar& x, const Rational& threshold, long max_bits) {
  Ordering o = compare_with_certification(x, threshold);
  if (o != Ordering::Unresolved || !x.refinable() || x.is_point()) return o;
  long bits = std::max(64L, -x.width_log2() + 1);
  while (bits <= max_bits) {
    Scalar r = x.refine(bits);
    o = compare_with_certification(r, threshold);
    if (o != Ordering::Unresolved || r.is_point()) return o;
    bits *= 2;
  }
  return Ordering::Unresolved;
}

std::optional<bool> certified_less(const Scalar& a, const Scalar& b, long max_bits) {
  Scalar x = a, y = b;
  long bits = 64;
  while (true) {
    if (mpfr_less_p(x.upper().get(), y.lower().get())) return true;
    if (mpfr_greater_p(x.lower().get(), y.upper().get())) return false;
    if (bits > max_bits || (!x.refinable() && !y.refinable())) return std::nullopt;
    if (x.refinable()) x = x.refine(bits);
    if (y.refinable()) y = y.refine(bits);
    bits *= 2;
  }
}

// ---------------------------------------------------------------- Polynomial

Polynomial::Polynomial(std::vector<Rational> coefficients) : coeffs_(std::move(coefficients)) { trim(); }

void Polynomial::trim() {
  while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
}

Polynomial Polynomial::monomial(const Rational& c, std::size_t degree) {
  std::vector<Rational> v(degree + 1, Rational(0));
  v[degree] = c;
  return Polynomial(std::move(v));
}

Rational Polynomial::evaluate(const Rational& z) const {
  Rational acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
  return acc;
}

Scalar Polynomial::evaluate(const Scalar& z) const {
  if (coeffs_.empty()) return Scalar::from_integer(0);
  Scalar acc = Scalar::from_rational(coeffs_.back(), z.precision_bits());
  for (long i = degree() - 1; i >= 0; --i) {
    acc = acc * z + Scalar::from_rational(coeffs_[static_cast<std::size_t>(i)], z.precision_bits());
  }
  return acc;
}

int Polynomial::sign_at_dyadic(const Integer& num, unsigned long exponent) const {
  if (coeffs_.empty()) return 0;
  // Clear coefficient denominators, then evaluate sum c_i num^i 2^{e(d-i)}.
  Integer common = 1;
  for (const auto& c : coeffs_) mpz_lcm(common.get_mpz_t(), common.get_mpz_t(), c.get_den_mpz_t());
  const std::size_t d = coeffs_.size() - 1;
  Integer acc = Integer(coeffs_[d] * common);
  Integer term;
  for (std::size_t k = d; k-- > 0;) {
    acc *= num;
    term = Integer(coeffs_[k] * common);
    mpz_mul_2exp(term.get_mpz_t(), term.get_mpz_t(), exponent * (d - k));
    acc += term;
  }
  return sgn(acc);
}

int Polynomial::sign_at(const Rational& z) const { return sgn(evaluate(z)); }

Polynomial Polynomial::operator-() const {
  std::vector<Rational> v = coeffs_;
  for (auto& c : v) c = -c;
  return Polynomial(std::move(v));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<Rational> v(std::max(a.coeffs_.size(), b.coeffs_.size()), Rational(0));
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) v[i] += a.coeffs_[i];
  for (std::size_t i = 0; i < b.coeffs_.size(); ++i) v[i] += b.coeffs_[i];
  return Polynomial(std::move(v));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-b); }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero() || b.is_zero()) return {};
  std::vector<Rational> v(a.coeffs_.size() + b.coeffs_.size() - 1, Rational(0));
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    if (a.coeffs_[i] == 0) continue;
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) v[i + j] += a.coeffs_[i] * b.coeffs_[j];
  }
  return Polynomial(std::move(v));
}

Polynomial Polynomial::shifted(std::size_t k) const {
  if (is_zero()) return {};
  std::vector<Rational> v(k, Rational(0));
  v.insert(v.end(), coeffs_.begin(), coeffs_.end());
  return Polynomial(std::move(v));
}

Polynomial Polynomial::monic() const {
  if (is_zero()) return {};
  std::vector<Rational> v = coeffs_;
  Rational lead = v.back();
  for (auto& c : v) c /= lead;
  return Polynomial(std::move(v));
}

std::pair<Polynomial, Polynomial> Polynomial::divmod(const Polynomial& divisor) const {
  if (divisor.is_zero()) fail(ErrorCode::InvalidArgument, "polynomial division by zero");
  std::vector<Rational> rem = coeffs_;
  const long dd = divisor.degree();
  if (degree() < dd) return {Polynomial(), *this};
  std::vector<Rational> quot(static_cast<std::size_t>(degree() - dd + 1), Rational(0));
  const Rational& lead = divisor.leading();
  for (long i = degree(); i >= dd; --i) {
    Rational c = rem[static_cast<std::size_t>(i)] / lead;
    if (c == 0) continue;
    quot[static_cast<std::size_t>(i - dd)] = c;
    for (long j = 0; j <= dd; ++j) rem[static_cast<std::size_t>(i - dd + j)] -= c * divisor.coeffs_[static_cast<std::size_t>(j)];
  }
  return {Polynomial(std::move(quot)), Polynomial(std::move(rem))};
}

std::string Polynomial::to_string() const {
  if (is_zero()) return "0";
  std::ostringstream out;
  bool first = true;
  for (long i = degree(); i >= 0; --i) {
    const Rational& c = coeffs_[static_cast<std::size_t>(i)];
    if (c == 0) continue;
    if (!first) out << (c > 0 ? " + " : " - ");
    else if (c < 0) out << "-";
    Rational a = abs(c);
    if (a != 1 || i == 0) out << a.get_str();
    if (i >= 1) out << "z";
    if (i >= 2) out << "^" << i;
    first = false;
  }
  return out.str();
}

Polynomial gcd(Polynomial a, Polynomial b) {
  while (!b.is_zero()) {
    Polynomial r = a.mod(b);
    a = std::move(b);
    b = std::move(r);
  }
  return a.monic();
}

// ---------------------------------------------------------------- series

Polynomial ExpansionSeries::cleared_polynomial() const {
  // Prefix part: z^a - sum u_i z^{a-i}.
  const std::size_t a = prefix.size();
  std::vector<Rational> head(a + 1, Rational(0));
  head[a] = 1;
  for (std::size_t i = 1; i <= a; ++i) head[a - i] -= prefix[i - 1];
  Polynomial head_poly(std::move(head));
  bool zero_period = std::all_of(period.begin(), period.end(), [](const Rational& c) { return c == 0; });
  if (period.empty() || zero_period) return head_poly;
  // (z^L - 1)(head) - sum p_j z^{L-j}
  const std::size_t L = period.size();
  Polynomial zl = Polynomial::monomial(1, L) - Polynomial::constant(1);
  std::vector<Rational> tail(L, Rational(0));
  for (std::size_t j = 1; j <= L; ++j) tail[L - j] = period[j - 1];
  return zl * head_poly - Polynomial(std::move(tail));
}

std::string ExpansionSeries::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < prefix.size(); ++i) out << (i ? "," : "") << prefix[i].get_str();
  if (!period.empty()) {
    out << "(";
    for (std::size_t i = 0; i < period.size(); ++i) out << (i ? "," : "") << period[i].get_str();
    out << ")";
  }
  return out.str();
}

// ---------------------------------------------------------------- PolyRoot

PolyRoot PolyRoot::from_rational(const Rational& q) {
  auto s = std::make_shared<State>();
  s->poly = Polynomial({-q, Rational(1)});
  s->lo = q;
  s->hi = q;
  s->exact = true;
  return PolyRoot(std::move(s));
}

PolyRoot PolyRoot::from_polynomial(Polynomial poly, const Rational& lo, const Rational& hi) {
  if (poly.is_zero()) fail(ErrorCode::NoRoot, "zero polynomial");
  if (lo > hi) fail(ErrorCode::InvalidArgument, "empty bracket");
  int slo = poly.sign_at(lo);
  int shi = poly.sign_at(hi);
  if (slo == 0) return from_rational(lo);
  if (shi == 0) return from_rational(hi);
  if (slo == shi) fail(ErrorCode::NoRoot, "no sign change of " + poly.to_string() + " on the bracket");
  auto s = std::make_shared<State>();
  s->poly = std::move(poly);
  s->lo = lo;
  s->hi = hi;
  s->sign_lo = slo;
  return PolyRoot(std::move(s));
}

PolyRoot PolyRoot::from_series(const ExpansionSeries& series, long precision_bits) {
  Rational cmax = 0, sum = 0;
  bool periodic = false;
  for (const auto& c : series.prefix) {
    if (c < 0) fail(ErrorCode::InvalidArgument, "negative expansion coefficient");
    cmax = std::max(cmax, c);
    sum += c;
  }
  for (const auto& c : series.period) {
    if (c < 0) fail(ErrorCode::InvalidArgument, "negative expansion coefficient");
    cmax = std::max(cmax, c);
    if (c > 0) periodic = true;
  }
  // z -> sum c_i z^{-i} is decreasing on (1, inf); the root is > 1 iff the
  // series exceeds 1 at z = 1.
  if (!periodic && sum <= 1) {
    fail(ErrorCode::DegenerateApproximant, "root of 1 = sum c_i z^-i is <= 1 for coefficients " + series.to_string());
  }
  Rational lo = 1;
  Rational hi = cmax + 1;
  PolyRoot root = from_polynomial(series.cleared_polynomial(), lo, hi);
  root.state_->series = series;
  root.value(precision_bits);
  return root;
}

std::pair<Rational, Rational> PolyRoot::bracket() const {
  std::lock_guard<std::mutex> lock(state_->mutex);
  return {state_->lo, state_->hi};
}

std::optional<Rational> PolyRoot::exact() const {
  std::lock_guard<std::mutex> lock(state_->mutex);
  if (state_->exact) return state_->lo;
  return std::nullopt;
}

void PolyRoot::bisect_to(State& s, long bits) {
  if (s.exact) return;
  // Make both endpoints dyadic first; then midpoints stay dyadic.
  Rational width = s.hi - s.lo;
  Rational target(1);
  if (bits >= 0) {
    mpz_mul_2exp(target.get_den_mpz_t(), target.get_den_mpz_t(), static_cast<mp_bitcnt_t>(bits));
  } else {
    mpz_mul_2exp(target.get_num_mpz_t(), target.get_num_mpz_t(), static_cast<mp_bitcnt_t>(-bits));
  }
  target.canonicalize();
  while (width > target) {
    Rational mid = (s.lo + s.hi) / 2;
    unsigned long e = static_cast<unsigned long>(mpz_sizeinbase(mid.get_den_mpz_t(), 2) - 1);
    int sm = mpz_popcount(mid.get_den_mpz_t()) == 1 ? s.poly.sign_at_dyadic(mid.get_num(), e) : s.poly.sign_at(mid);
    if (sm == 0) {
      s.lo = s.hi = mid;
      s.exact = true;
      return;
    }
    if (sm == s.sign_lo) s.lo = mid;
    else s.hi = mid;
    width = s.hi - s.lo;
  }
}

Scalar PolyRoot::value(long bits) const {
  Rational lo, hi;
  {
    std::lock_guard<std::mutex> lock(state_->mutex);
    bisect_to(*state_, bits);
    lo = state_->lo;
    hi = state_->hi;
  }
  long mag = static_cast<long>(mpz_sizeinbase(hi.get_num_mpz_t(), 2)) -
             static_cast<long>(mpz_sizeinbase(hi.get_den_mpz_t(), 2)) + 1;
  long prec = bits + std::max(mag, 1L) + 16;
  BigFloat l = BigFloat::from_rational(lo, prec, MPFR_RNDD);
  BigFloat h = BigFloat::from_rational(hi, prec, MPFR_RNDU);
  auto state = state_;
  auto refiner = std::make_shared<const Scalar::Refiner>([state](long target) {
    return PolyRoot(state).value(target);
  });
  if (mpfr_equal_p(l.get(), h.get())) return Scalar(std::move(l), std::move(h));
  return Scalar(std::move(l), std::move(h), std::move(refiner));
}

bool PolyRoot::is_root_of(const Polynomial& q) const {
  if (q.is_zero()) return true;
  if (auto e = exact()) return q.evaluate(*e) == 0;
  Polynomial g = gcd(polynomial(), q);
  if (g.degree() < 1) return false;
  auto [lo, hi] = bracket();
  // The bracket isolates a simple root of poly; g divides poly, so g has at
  // most that root inside and changes sign there iff it vanishes at it.
  int slo = g.sign_at(lo), shi = g.sign_at(hi);
  return slo != shi && slo != 0 && shi != 0;
}

PolyRoot isolate_root(const std::vector<Rational>& coefficients, const std::pair<Rational, Rational>& search,
                      long precision_bits) {
  ExpansionSeries series{coefficients, {}};
  Rational sum = 0;
  for (const auto& c : coefficients) sum += c;
  if (sum <= 1) {
    fail(ErrorCode::DegenerateApproximant, "isolated root is <= 1 for coefficients " + series.to_string());
  }
  Polynomial p = series.cleared_polynomial();
  const auto& [lo, hi] = search;
  if (lo < 1) fail(ErrorCode::InvalidArgument, "search interval must lie in [1, inf)");
  PolyRoot root = PolyRoot::from_polynomial(p, lo, hi);
  if (auto e = root.exact(); e && *e <= 1) fail(ErrorCode::DegenerateApproximant, "root equals 1");
  root.state_->series = series;
  root.value(precision_bits);
  return root;
}

// ---------------------------------------------------------------- parsing

Rational parse_rational(const std::string& text) {
  if (text.empty()) fail(ErrorCode::InvalidArgument, "empty rational");
  auto dot = text.find('.');
  try {
    if (dot != std::string::npos) {
      std::string whole = text.substr(0, dot);
      std::string frac = text.substr(dot + 1);
      bool neg = !whole.empty() && whole[0] == '-';
      if (neg) whole = whole.substr(1);
      if (whole.empty()) whole = "0";
      Integer den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      Rational q(Integer(whole + frac, 10), den);
      q.canonicalize();
      return neg ? Rational(-q) : q;
    }
    Rational q(text, 10);
    if (q.get_den() == 0) fail(ErrorCode::InvalidArgument, "zero denominator in '" + text + "'");
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    fail(ErrorCode::InvalidArgument, "not a rational: '" + text + "'");
  }
}

std::string to_string(const Rational& q) { return q.get_str(); }

}  // namespace betadim
