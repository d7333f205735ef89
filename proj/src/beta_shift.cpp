#include "betadim/beta_shift.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

#include "betadim/error.hpp"

namespace betadim {

// ---------------------------------------------------------------- automaton

std::optional<std::size_t> AdmissibilityAutomaton::step(std::size_t state, Digit digit) const {
  if (digit > alphabet_top || state >= num_states) return std::nullopt;
  long next = transitions[state * (alphabet_top + 1u) + digit];
  if (next < 0) return std::nullopt;
  return static_cast<std::size_t>(next);
}

std::optional<std::size_t> AdmissibilityAutomaton::run(std::span<const Digit> w, std::size_t start) const {
  std::size_t s = start;
  for (Digit d : w) {
    auto next = step(s, d);
    if (!next) return std::nullopt;
    s = *next;
  }
  return s;
}

std::vector<std::vector<Integer>> AdmissibilityAutomaton::counting_matrix() const {
  std::vector<std::vector<Integer>> m(num_states, std::vector<Integer>(num_states, 0));
  for (std::size_t i = 0; i < num_states; ++i) {
    for (unsigned d = 0; d <= alphabet_top; ++d) {
      long j = transitions[i * (alphabet_top + 1u) + d];
      if (j >= 0) m[i][static_cast<std::size_t>(j)] += 1;
    }
  }
  return m;
}

namespace {

using Matrix = std::vector<std::vector<Integer>>;

Matrix multiply(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.size();
  Matrix c(n, std::vector<Integer>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      if (a[i][k] == 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (b[k][j] != 0) c[i][j] += a[i][k] * b[k][j];
      }
    }
  }
  return c;
}

// M^n applied to the all-ones vector.
std::vector<Integer> power_times_ones(Matrix m, std::size_t n) {
  const std::size_t s = m.size();
  Matrix result(s, std::vector<Integer>(s, 0));
  for (std::size_t i = 0; i < s; ++i) result[i][i] = 1;
  while (n > 0) {
    if (n & 1u) result = multiply(result, m);
    n >>= 1u;
    if (n > 0) m = multiply(m, m);
  }
  std::vector<Integer> out(s, 0);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) out[i] += result[i][j];
  }
  return out;
}

}  // namespace

std::vector<Integer> AdmissibilityAutomaton::counts_from_all_states(std::size_t n) const {
  return power_times_ones(counting_matrix(), n);
}

Integer AdmissibilityAutomaton::count(std::size_t n, std::size_t start) const {
  if (start >= num_states) fail(ErrorCode::InvalidArgument, "automaton state out of range");
  if (num_states == 1) {
    Integer r;
    mpz_ui_pow_ui(r.get_mpz_t(), alphabet_top + 1u, n);
    return r;
  }
  return counts_from_all_states(n)[start];
}

namespace {

AdmissibilityAutomaton build_automaton(const InfiniteWord& bound, Digit top) {
  AdmissibilityAutomaton a;
  a.bound = bound;
  a.alphabet_top = top;
  const std::size_t pre = bound.prefix.size();
  a.num_states = bound.horizon();
  a.transitions.assign(a.num_states * (top + 1u), -1);
  for (std::size_t j = 0; j < a.num_states; ++j) {
    Digit s = bound.at(j);
    std::size_t next = j + 1 == a.num_states ? pre : j + 1;
    for (unsigned d = 0; d <= top; ++d) {
      long& slot = a.transitions[j * (top + 1u) + d];
      if (d < s) slot = 0;
      else if (d == s) slot = static_cast<long>(next);
    }
  }
  return a;
}

long coefficient_bits(const Polynomial& p) {
  long bits = 0;
  for (const auto& c : p.coefficients()) {
    long b = static_cast<long>(mpz_sizeinbase(c.get_num_mpz_t(), 2) + mpz_sizeinbase(c.get_den_mpz_t(), 2));
    bits = std::max(bits, b);
  }
  return bits;
}

// Bits of the integer part of a positive rational.
long integer_bits(const Rational& q) {
  long n = static_cast<long>(mpz_sizeinbase(q.get_num_mpz_t(), 2));
  long d = static_cast<long>(mpz_sizeinbase(q.get_den_mpz_t(), 2));
  return std::max(n - d + 1, 1L);
}

Integer floor_of_bound(const BigFloat& x) {
  Integer z;
  mpfr_get_z(z.get_mpz_t(), x.get(), MPFR_RNDD);
  return z;
}

constexpr long kMaxDigitBits = 1L << 18;

}  // namespace

// ---------------------------------------------------------------- BetaSystem

struct BetaSystem::Impl {
  enum class Status { Open, Finite, Periodic };

  std::string label;
  PolyRoot root;
  bool integer = false;
  Digit top = 1;
  std::size_t horizon = kDefaultHorizon;

  mutable std::recursive_mutex mutex;
  Polynomial modulus;
  DigitWord d1;
  std::vector<Polynomial> orbit;  // orbit[j] = T^j(1)
  std::multimap<double, std::size_t> orbit_index;
  Status status = Status::Open;
  std::size_t periodic_start = 0;
  std::size_t period = 0;
  std::optional<AdmissibilityAutomaton> automaton;

  explicit Impl(PolyRoot r) : root(std::move(r)) {}

  Polynomial reduce(const Polynomial& e) const { return e.degree() < modulus.degree() ? e : e.mod(modulus); }

  Scalar enclose(const Polynomial& e, long bits) const {
    if (e.is_zero()) return Scalar::from_integer(0);
    if (auto q = root.exact()) {
      Rational v = e.evaluate(*q);
      long mag = static_cast<long>(mpz_sizeinbase(v.get_num_mpz_t(), 2));
      return Scalar::from_rational(v, bits + mag + 8);
    }
    long mag = integer_bits(root.bracket().second) + 2;
    long prec = bits + coefficient_bits(e) + (e.degree() + 1) * mag + 32;
    for (int attempt = 0; attempt < 16; ++attempt) {
      Scalar r = e.evaluate(root.value(prec));
      if (r.width_at_most(bits)) return r;
      prec *= 2;
    }
    fail(ErrorCode::PrecisionExhausted, "cannot enclose element of Q(beta)");
  }

  // Exact e(beta) == 0; shrinks the modulus to the vanishing factor.
  bool equals_zero(const Polynomial& e) {
    Polynomial r = reduce(e);
    if (r.is_zero()) return true;
    if (root.exact()) return false;
    Polynomial g = gcd(modulus, r);
    if (g.degree() < 1 || !root.is_root_of(g)) return false;
    modulus = g;
    for (auto& x : orbit) x = reduce(x);
    return true;
  }

  int sign(const Polynomial& e) {
    bool tested = false;
    for (long bits = 32; bits <= kMaxDigitBits; bits *= 2) {
      Scalar r = enclose(e, bits);
      if (mpfr_sgn(r.lower().get()) > 0) return 1;
      if (mpfr_sgn(r.upper().get()) < 0) return -1;
      if (!tested) {
        tested = true;
        if (equals_zero(e)) return 0;
      }
    }
    fail(ErrorCode::PrecisionExhausted, "sign of element not certified");
  }

  Integer floor_of(const Polynomial& e) {
    bool tested = false;
    for (long bits = 32; bits <= kMaxDigitBits; bits *= 2) {
      Scalar r = enclose(e, bits);
      Integer lo = floor_of_bound(r.lower());
      Integer hi = floor_of_bound(r.upper());
      if (lo == hi) return lo;
      if (hi == lo + 1 && !tested) {
        tested = true;
        if (equals_zero(e - Polynomial::constant(Rational(hi)))) return hi;
      }
    }
    fail(ErrorCode::PrecisionExhausted, "digit straddles a discontinuity of T_beta beyond the precision budget");
  }

  // One more digit of d_beta(1).
  void extend_once() {
    if (status != Status::Open) return;
    const std::size_t j = d1.size();
    Polynomial y = reduce(orbit[j].shifted(1));
    Integer d = floor_of(y);
    if (d < 0 || d > top) fail(ErrorCode::InvalidArgument, "digit of d_beta(1) outside the alphabet");
    d1.push_back(static_cast<Digit>(d.get_ui()));
    Polynomial next = reduce(y - Polynomial::constant(Rational(d)));
    if (next.is_zero()) {
      status = Status::Finite;
      return;
    }
    Scalar r = enclose(next, 64);
    if (mpfr_sgn(r.lower().get()) <= 0 && equals_zero(next)) {
      status = Status::Finite;
      return;
    }
    double mid = r.midpoint();
    for (auto it = orbit_index.lower_bound(mid - 1e-12); it != orbit_index.end() && it->first <= mid + 1e-12; ++it) {
      if (equals_zero(next - orbit[it->second])) {
        status = Status::Periodic;
        periodic_start = it->second;
        period = j + 1 - it->second;
        return;
      }
    }
    orbit.push_back(std::move(next));
    orbit_index.emplace(mid, j + 1);
  }

  void extend_to(std::size_t n) {
    while (status == Status::Open && d1.size() < n) extend_once();
  }

  std::optional<InfiniteWord> star() {
    if (integer) return InfiniteWord::periodic({top});
    extend_to(horizon);
    if (status == Status::Finite) {
      DigitWord p = d1;
      p.back() -= 1;
      return InfiniteWord::periodic(std::move(p));
    }
    if (status == Status::Periodic) {
      return InfiniteWord{DigitWord(d1.begin(), d1.begin() + static_cast<long>(periodic_start)),
                          DigitWord(d1.begin() + static_cast<long>(periodic_start), d1.end())};
    }
    return std::nullopt;
  }

  Digit star_digit(std::size_t i) {
    if (integer) return top;
    extend_to(i + 1);
    switch (status) {
      case Status::Open:
        return d1[i];
      case Status::Finite: {
        const std::size_t m = d1.size();
        std::size_t r = i % m;
        return r + 1 == m ? static_cast<Digit>(d1[r] - 1) : d1[r];
      }
      case Status::Periodic:
        if (i < d1.size()) return d1[i];
        return d1[periodic_start + (i - periodic_start) % period];
    }
    return 0;
  }

  // Largest admissible tail value from state j: T^j(1) for j inside the
  // orbit (with the periodic or finite folding applied).
  Polynomial tail(std::size_t j) {
    if (integer) return Polynomial::constant(1);
    extend_to(j + 1);
    switch (status) {
      case Status::Open:
        return orbit[j];
      case Status::Finite:
        return orbit[j % d1.size()];
      case Status::Periodic:
        if (j < orbit.size()) return orbit[j];
        return orbit[periodic_start + (j - periodic_start) % period];
    }
    return Polynomial::constant(1);
  }

  Polynomial inverse_z() const {
    const auto& m = modulus.coefficients();
    std::vector<Rational> q(m.begin() + 1, m.end());
    Polynomial r(std::move(q));
    return Polynomial::constant(Rational(-1) / m[0]) * r;
  }
};

namespace {

std::shared_ptr<BetaSystem::Impl> make_impl(PolyRoot root, std::string label) {
  auto impl = std::make_shared<BetaSystem::Impl>(std::move(root));
  impl->label = std::move(label);
  impl->modulus = impl->root.polynomial().monic();
  impl->orbit.push_back(Polynomial::constant(1));
  return impl;
}

}  // namespace

BetaSystem BetaSystem::integer(unsigned k) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "integer base must be >= 2");
  auto impl = make_impl(PolyRoot::from_rational(Rational(k)), "int:" + std::to_string(k));
  impl->integer = true;
  impl->top = static_cast<Digit>(k - 1);
  impl->d1.assign(1, impl->top);
  impl->status = Impl::Status::Periodic;
  impl->periodic_start = 0;
  impl->period = 1;
  return BetaSystem(std::move(impl));
}

BetaSystem BetaSystem::rational(const Rational& q) {
  if (q <= 1) fail(ErrorCode::InvalidArgument, "beta must exceed 1");
  if (q.get_den() == 1) {
    if (q.get_num() > 256) fail(ErrorCode::InvalidArgument, "integer base too large");
    return integer(static_cast<unsigned>(q.get_num().get_ui()));
  }
  return from_root(PolyRoot::from_rational(q), "rat:" + q.get_str());
}

BetaSystem BetaSystem::from_expansion(const std::vector<unsigned>& coefficients) {
  std::vector<Rational> c(coefficients.begin(), coefficients.end());
  PolyRoot root = PolyRoot::from_series(ExpansionSeries{c, {}});
  std::ostringstream label;
  label << "root:";
  for (std::size_t i = 0; i < coefficients.size(); ++i) label << (i ? "," : "") << coefficients[i];
  return from_root(root, label.str());
}

BetaSystem BetaSystem::from_root(const PolyRoot& root, std::string label) {
  if (auto q = root.exact()) {
    if (*q <= 1) fail(ErrorCode::DegenerateApproximant, "beta must exceed 1");
    if (q->get_den() == 1) {
      BetaSystem b = integer(static_cast<unsigned>(q->get_num().get_ui()));
      b.impl_->label = std::move(label);
      return b;
    }
  }
  auto impl = make_impl(root, std::move(label));
  Integer top;
  {
    std::lock_guard<std::recursive_mutex> lock(impl->mutex);
    top = impl->floor_of(impl->reduce(Polynomial::monomial(1, 1)));
  }
  if (top < 1) fail(ErrorCode::DegenerateApproximant, "beta must exceed 1");
  if (top > 255) fail(ErrorCode::InvalidArgument, "alphabet too large");
  impl->top = static_cast<Digit>(top.get_ui());
  return BetaSystem(std::move(impl));
}

BetaSystem BetaSystem::parse(const std::string& spec, std::size_t horizon) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) fail(ErrorCode::InvalidArgument, "beta spec needs a kind prefix: '" + spec + "'");
  std::string kind = spec.substr(0, colon);
  std::string body = spec.substr(colon + 1);
  BetaSystem result = [&]() -> BetaSystem {
    if (kind == "int") {
      Rational q = parse_rational(body);
      if (q.get_den() != 1 || q < 2 || q > 256) fail(ErrorCode::InvalidArgument, "int: needs an integer in [2, 256]");
      return integer(static_cast<unsigned>(q.get_num().get_ui()));
    }
    if (kind == "rat") return rational(parse_rational(body));
    if (kind == "root") {
      std::vector<unsigned> c;
      std::stringstream in(body);
      std::string item;
      while (std::getline(in, item, ',')) {
        Rational q = parse_rational(item);
        if (q < 0 || q.get_den() != 1 || q > 255) fail(ErrorCode::InvalidArgument, "root: coefficients are digits");
        c.push_back(static_cast<unsigned>(q.get_num().get_ui()));
      }
      if (c.empty()) fail(ErrorCode::InvalidArgument, "root: needs coefficients");
      return from_expansion(c);
    }
    if (kind == "word") return from_root(parry_invert(parse_infinite_word(body)), spec);
    if (kind == "approx") {
      auto last = body.rfind(':');
      if (last == std::string::npos) fail(ErrorCode::InvalidArgument, "approx: needs <beta-spec>:<N>");
      Rational n = parse_rational(body.substr(last + 1));
      if (n.get_den() != 1 || n < 1) fail(ErrorCode::InvalidArgument, "approx: N must be a positive integer");
      return beta_N(parse(body.substr(0, last), horizon), n.get_num().get_ui());
    }
    fail(ErrorCode::InvalidArgument, "unknown beta spec kind '" + kind + "'");
  }();
  result.set_horizon(horizon);
  return result;
}

bool BetaSystem::is_integer() const { return impl_->integer; }
Digit BetaSystem::alphabet_top() const { return impl_->top; }
const PolyRoot& BetaSystem::root() const { return impl_->root; }
Scalar BetaSystem::value(long bits) const { return impl_->root.value(bits); }
const std::string& BetaSystem::label() const { return impl_->label; }

std::size_t BetaSystem::horizon() const {
  std::lock_guard<std::recursive_mutex> lock(impl_->mutex);
  return impl_->horizon;
}

void BetaSystem::set_horizon(std::size_t h) {
  std::lock_guard<std::recursive_mutex> lock(impl_->mutex);
  impl_->horizon = std::max<std::size_t>(h, 1);
}

DigitWord BetaSystem::expansion_of_one(std::size_t n) const {
  std::lock_guard<std::recursive_mutex> lock(impl_->mutex);
  if (impl_->integer) return DigitWord(n, impl_->top);
  impl_->extend_to(n);
  DigitWord out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i < impl_->d1.size()) out[i] = impl_->d1[i];
    else if (impl_->status == Impl::Status::Periodic) out[i] = impl_->star_digit(i);
  }
  return out;
}

std::optional<std::size_t> BetaSystem::simple_parry_length() const {
  std::lock_guard<std::recursive_mutex> lock(impl_->mutex);
  if (impl_->integer) return 1;
  impl_->extend_to(impl_->horizon);
  if (impl_->status == Impl::Status::Finite) return impl_->d1.size();
  return std::nullopt;
}

std::optional<InfiniteWord> BetaSystem::star_word() const {
  std::lock_guard<std::recursive_mutex> lock(impl_->mutex);
  return impl_->star();
}

Digit BetaSystem::star_digit(std::size_t i) const {
  std::lock_guard<std::recursive_mutex> lock(impl_->mutex);
  return impl_->star_digit(i);
}

const AdmissibilityAutomaton& BetaSystem::automaton() const {
  std::lock_guard<std::recursive_mutex> lock(impl_->mutex);
  if (!impl_->automaton) {
    auto s = impl_->star();
    if (!s) {
      fail(ErrorCode::HorizonTooDeep, "expansion of 1 for " + impl_->label + " is not eventually periodic within " +
                                          std::to_string(impl_->horizon) + " digits");
    }
    impl_->automaton = build_automaton(*s, impl_->top);
  }
  return *impl_->automaton;
}

std::optional<std::size_t> BetaSystem::transition(std::size_t state, Digit digit) const {
  if (finite_type()) return automaton().step(state, digit);
  Digit s = star_digit(state);
  if (digit < s) return 0;
  if (digit == s) return state + 1;
  return std::nullopt;
}

std::optional<std::size_t> BetaSystem::run(std::span<const Digit> w, std::size_t start) const {
  if (finite_type()) return automaton().run(w, start);
  std::size_t s = start;
  for (Digit d : w) {
    auto next = transition(s, d);
    if (!next) return std::nullopt;
    s = *next;
  }
  return s;
}

Polynomial BetaSystem::tail_value(std::size_t state) const {
  std::lock_guard<std::recursive_mutex> lock(impl_->mutex);
  return impl_->tail(state);
}

Polynomial BetaSystem::modulus() const {
  std::lock_guard<std::recursive_mutex> lock(impl_->mutex);
  return impl_->modulus;
}

Polynomial BetaSystem::reduce(const Polynomial& element) const {
  std::lock_guard<std::recursive_mutex> lock(impl_->mutex);
  return impl_->reduce(element);
}

Scalar BetaSystem::evaluate(const Polynomial& element) const {
  auto impl = impl_;
  Scalar first = impl->enclose(element, 64);
  if (first.is_point()) return first;
  auto refiner = std::make_shared<const Scalar::Refiner>([impl, element](long bits) {
    return impl->enclose(element, bits);
  });
  return Scalar(first.lower(), first.upper(), std::move(refiner));
}

bool BetaSystem::equals_exactly(const Polynomial& element, const Rational& value) const {
  std::lock_guard<std::recursive_mutex> lock(impl_->mutex);
  return impl_->equals_zero(element - Polynomial::constant(value));
}

Integer BetaSystem::floor_of(const Polynomial& element) const {
  std::lock_guard<std::recursive_mutex> lock(impl_->mutex);
  return impl_->floor_of(impl_->reduce(element));
}

int BetaSystem::sign(const Polynomial& element) const {
  std::lock_guard<std::recursive_mutex> lock(impl_->mutex);
  return impl_->sign(impl_->reduce(element));
}

Polynomial BetaSystem::power(long e) const {
  std::lock_guard<std::recursive_mutex> lock(impl_->mutex);
  Polynomial base = e >= 0 ? impl_->reduce(Polynomial::monomial(1, 1)) : impl_->inverse_z();
  unsigned long n = static_cast<unsigned long>(e >= 0 ? e : -e);
  Polynomial result = Polynomial::constant(1);
  while (n > 0) {
    if (n & 1u) result = impl_->reduce(result * base);
    n >>= 1u;
    if (n > 0) base = impl_->reduce(base * base);
  }
  return result;
}

// ---------------------------------------------------------------- free functions

DigitWord greedy_expand(const BetaSystem& beta, const Polynomial& x, std::size_t n) {
  Polynomial cur = beta.reduce(x);
  int lo = beta.sign(cur);
  int hi = beta.sign(cur - Polynomial::constant(1));
  if (lo < 0 || hi > 0) fail(ErrorCode::InvalidArgument, "greedy expansion needs 0 <= x <= 1");
  if (hi == 0) return beta.expansion_of_one(n);
  DigitWord out;
  out.reserve(n);
  const Polynomial z = Polynomial::monomial(1, 1);
  for (std::size_t i = 0; i < n; ++i) {
    if (cur.is_zero()) {
      out.push_back(0);
      continue;
    }
    Polynomial y = beta.reduce(cur * z);
    Integer d = beta.floor_of(y);
    out.push_back(static_cast<Digit>(d.get_ui()));
    cur = beta.reduce(y - Polynomial::constant(Rational(d)));
  }
  return out;
}

DigitWord greedy_expand(const BetaSystem& beta, const Rational& x, std::size_t n) {
  return greedy_expand(beta, Polynomial::constant(x), n);
}

DigitWord greedy_expand(const BetaSystem& beta, const Scalar& x, std::size_t n, long max_bits) {
  if (compare_refining(x, 0) == Ordering::Less || compare_refining(x, 1) == Ordering::Greater) {
    fail(ErrorCode::InvalidArgument, "greedy expansion needs 0 <= x <= 1");
  }
  if (x.is_point() && x.contains(Rational(1))) return beta.expansion_of_one(n);
  // Each step multiplies the width by about beta, so budget log2(beta) bits
  // per digit on top of the target.
  long per_digit = integer_bits(beta.root().bracket().second) + 1;
  long bits = 64 + static_cast<long>(n) * per_digit;
  const Digit top = beta.alphabet_top();
  for (;;) {
    if (bits > max_bits) fail(ErrorCode::PrecisionExhausted, "greedy digit undecided within the precision budget");
    Scalar cur = x.width_at_most(bits) ? x : (x.refinable() ? x.refine(bits) : x);
    Scalar b = beta.value(bits + 16);
    DigitWord out;
    out.reserve(n);
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      Scalar y = b * cur;
      Integer lo = floor_of_bound(y.lower());
      Integer hi = floor_of_bound(y.upper());
      if (lo != hi || lo < 0 || lo > top) {
        ok = false;
        break;
      }
      out.push_back(static_cast<Digit>(lo.get_ui()));
      cur = y - Scalar::from_rational(Rational(lo), bits + 16);
    }
    if (ok) return out;
    if (!x.refinable() && !x.width_at_most(bits)) {
      fail(ErrorCode::PrecisionExhausted, "input interval too wide to certify the requested digits");
    }
    bits *= 2;
  }
}

DigitWord expansion_of_one_star(const BetaSystem& beta, std::size_t n) {
  DigitWord out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = beta.star_digit(i);
  return out;
}

bool is_admissible(const BetaSystem& beta, std::span<const Digit> w) {
  for (Digit d : w) {
    if (d > beta.alphabet_top()) return false;
  }
  return beta.run(w).has_value();
}

bool is_self_admissible(const InfiniteWord& w) {
  InfiniteWord v = w;
  if (v.period.empty()) v.period = {0};
  const std::size_t total = v.horizon();
  for (std::size_t k = 1; k < total; ++k) {
    for (std::size_t i = 0; i < total; ++i) {
      Digit a = v.at(k + i), b = v.at(i);
      if (a < b) break;
      if (a > b) return false;
    }
  }
  return true;
}

bool is_self_admissible_prefix(std::span<const Digit> w) {
  for (std::size_t k = 1; k < w.size(); ++k) {
    if (lex_compare_prefix(w.subspan(k), w) > 0) return false;
  }
  return true;
}

PolyRoot parry_invert(const InfiniteWord& w, long precision_bits) {
  if (!is_self_admissible(w)) fail(ErrorCode::NotSelfAdmissible, "word " + w.to_string() + " is not self-admissible");
  ExpansionSeries series;
  for (Digit d : w.prefix) series.prefix.emplace_back(d);
  for (Digit d : w.period) series.period.emplace_back(d);
  return PolyRoot::from_series(series, precision_bits);
}

AdmissibleCount count_admissible(const BetaSystem& beta, std::size_t n) {
  AdmissibleCount out;
  if (beta.finite_type()) {
    out.count = beta.automaton().count(n);
  } else {
    if (n > beta.horizon()) {
      fail(ErrorCode::HorizonTooDeep, "counting beyond the horizon for a beta that is not of finite type");
    }
    // Exact DP over prefix-match states; states never exceed n.
    std::vector<Integer> cur(n + 1, 0), next(n + 1, 0);
    cur[0] = 1;
    const Digit top = beta.alphabet_top();
    for (std::size_t step = 0; step < n; ++step) {
      std::fill(next.begin(), next.end(), 0);
      for (std::size_t s = 0; s <= step; ++s) {
        if (cur[s] == 0) continue;
        Digit bound = beta.star_digit(s);
        next[0] += cur[s] * static_cast<unsigned long>(std::min<unsigned>(bound, top + 1u));
        if (bound <= top) next[s + 1] += cur[s];
      }
      std::swap(cur, next);
    }
    for (const auto& c : cur) out.count += c;
  }
  const Polynomial count = Polynomial::constant(Rational(out.count));
  const Polynomial z_minus_1 = Polynomial(std::vector<Rational>{-1, 1});
  out.renyi_lower = beta.sign(beta.power(static_cast<long>(n)) - count) <= 0;
  out.renyi_upper = beta.sign(beta.power(static_cast<long>(n) + 1) - count * z_minus_1) >= 0;
  return out;
}

CylinderInterval cylinder(const BetaSystem& beta, std::span<const Digit> w) {
  for (Digit d : w) {
    if (d > beta.alphabet_top()) fail(ErrorCode::InvalidArgument, "digit outside the alphabet");
  }
  auto state = beta.run(w);
  if (!state) fail(ErrorCode::InvalidArgument, "cylinder of an inadmissible word " + format_word(w, ""));
  CylinderInterval c;
  c.word.assign(w.begin(), w.end());
  c.state = *state;
  c.full = *state == 0;
  const Polynomial zinv = beta.power(-1);
  Polynomial acc;
  for (std::size_t i = w.size(); i-- > 0;) acc = beta.reduce((acc + Polynomial::constant(Rational(w[i]))) * zinv);
  c.left_element = acc;
  c.length_element = beta.reduce(beta.tail_value(*state) * beta.power(-static_cast<long>(w.size())));
  c.left = beta.evaluate(c.left_element);
  c.length = beta.evaluate(c.length_element);
  c.right = beta.evaluate(beta.reduce(c.left_element + c.length_element));
  return c;
}

bool is_full(const BetaSystem& beta, std::span<const Digit> w) {
  auto state = beta.run(w);
  if (!state) fail(ErrorCode::InvalidArgument, "is_full of an inadmissible word " + format_word(w, ""));
  bool by_state = *state == 0;
  // Cross-check: the tail value is 1 exactly when the cylinder is full.
  bool by_length = beta.sign(beta.tail_value(*state) - Polynomial::constant(1)) == 0;
  if (by_state != by_length) throw std::logic_error("automaton state and cylinder length disagree on fullness");
  return by_state;
}

BetaSystem beta_N(const BetaSystem& beta, std::size_t N) {
  if (N < 1) fail(ErrorCode::InvalidArgument, "N must be >= 1");
  DigitWord eps = expansion_of_one_star(beta, N);
  std::vector<unsigned> c(eps.begin(), eps.end());
  BetaSystem out = BetaSystem::from_expansion(c);
  auto less = certified_less(out.value(), beta.value());
  if (!less || !*less) fail(ErrorCode::InvalidArgument, "approximant is not certified below beta");
  BetaSystem labelled = BetaSystem::from_root(out.root(), "approx:" + beta.label() + ":" + std::to_string(N));
  labelled.set_horizon(beta.horizon());
  return labelled;
}

}  // namespace betadim
