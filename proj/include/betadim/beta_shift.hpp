#pragma once

// Greedy beta-expansions, the expansion of 1, Parry admissibility, counting
// of admissible words, cylinders and the finite-type approximants beta_N.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "betadim/digits.hpp"
#include "betadim/numerics.hpp"

namespace betadim {

inline constexpr std::size_t kDefaultHorizon = 4096;

/// Deterministic automaton for the finite-type case. State j means the
/// current suffix matches the first j symbols of the bound word d1_star.
struct AdmissibilityAutomaton {
  InfiniteWord bound;
  Digit alphabet_top = 1;
  std::size_t num_states = 1;
  /// transitions[state * (top + 1) + digit], -1 = reject.
  std::vector<long> transitions;

  std::optional<std::size_t> step(std::size_t state, Digit digit) const;
  /// State after reading w from `start`, or nullopt if rejected.
  std::optional<std::size_t> run(std::span<const Digit> w, std::size_t start = 0) const;
  /// counting_matrix[i][j] = number of digits leading from i to j.
  std::vector<std::vector<Integer>> counting_matrix() const;
  /// Number of accepted words of length n starting from `start`.
  Integer count(std::size_t n, std::size_t start = 0) const;
  /// Number of accepted words of length n for every start state.
  std::vector<Integer> counts_from_all_states(std::size_t n) const;
};

/// A base beta > 1: its exact algebraic value, alphabet {0..top}, and the
/// lazily computed expansion of 1 together with the exact orbit T^j(1) in
/// Q(beta). Copies share state; lazy extension is internally synchronised.
class BetaSystem {
 public:
  static BetaSystem integer(unsigned k);
  static BetaSystem rational(const Rational& q);
  /// beta is the root > 1 of 1 = sum_i c_i z^{-i}.
  static BetaSystem from_expansion(const std::vector<unsigned>& coefficients);
  static BetaSystem from_root(const PolyRoot& root, std::string label);
  /// Grammar: int:<k> | rat:<p/q> | root:<c1,...,cm> | word:<digits> |
  /// approx:<beta-spec>:<N>
  static BetaSystem parse(const std::string& spec, std::size_t horizon = kDefaultHorizon);

  bool is_integer() const;
  Digit alphabet_top() const;
  const PolyRoot& root() const;
  Scalar value(long bits = kDefaultPrecision) const;
  const std::string& label() const;
  std::size_t horizon() const;
  void set_horizon(std::size_t h);

  /// First n digits of d_beta(1). For integer beta the convention
  /// (beta-1)^infinity is used.
  DigitWord expansion_of_one(std::size_t n) const;
  /// m if d_beta(1) is finite with last nonzero digit at position m. Probes
  /// up to the horizon.
  std::optional<std::size_t> simple_parry_length() const;
  /// d1_star as an eventually periodic word when it is known to be one.
  std::optional<InfiniteWord> star_word() const;
  bool finite_type() const { return star_word().has_value(); }
  /// i-th symbol (0-based) of the infinite expansion of 1.
  Digit star_digit(std::size_t i) const;

  /// Finite-type automaton; throws HorizonTooDeep if d1_star is not known to
  /// be eventually periodic within the horizon.
  const AdmissibilityAutomaton& automaton() const;
  /// Transition usable for every beta (unbounded states when not finite type).
  std::optional<std::size_t> transition(std::size_t state, Digit digit) const;
  std::optional<std::size_t> run(std::span<const Digit> w, std::size_t start = 0) const;

  /// Element of Q[z]/(M) representing sum_i eps*_{j+i} beta^{-i}, the largest
  /// value of an admissible tail from state j (equal to T^j(1) for j in
  /// range of the known orbit).
  Polynomial tail_value(std::size_t state) const;
  /// Current modulus M (monic, beta is a root).
  Polynomial modulus() const;
  Polynomial reduce(const Polynomial& element) const;
  /// Refinable enclosure of element(beta).
  Scalar evaluate(const Polynomial& element) const;
  /// Exact test element(beta) == value. May shrink the modulus.
  bool equals_exactly(const Polynomial& element, const Rational& value) const;
  /// floor(element(beta)) certified; exact ties are decided algebraically.
  Integer floor_of(const Polynomial& element) const;
  /// Certified sign of element(beta).
  int sign(const Polynomial& element) const;
  /// beta^e as an element of Q[z]/(M); e may be negative.
  Polynomial power(long e) const;

  struct Impl;

 private:
  explicit BetaSystem(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<Impl> impl_;
};

/// Greedy digits eps_n = floor(beta T^{n-1}(x)) for x in Q(beta) given as an
/// element of Q[z]/(M) (use Polynomial::constant for rationals).
DigitWord greedy_expand(const BetaSystem& beta, const Polynomial& x, std::size_t n);
DigitWord greedy_expand(const BetaSystem& beta, const Rational& x, std::size_t n);
/// Interval route for x without an algebraic description; iterates T_beta on
/// certified enclosures, restarting at higher precision when a digit is
/// undecided. Throws PrecisionExhausted past max_bits.
DigitWord greedy_expand(const BetaSystem& beta, const Scalar& x, std::size_t n, long max_bits = 1L << 16);

/// First n symbols of the infinite expansion of 1.
DigitWord expansion_of_one_star(const BetaSystem& beta, std::size_t n);

bool is_admissible(const BetaSystem& beta, std::span<const Digit> w);
/// sigma^k(w) <= w for all k >= 0; exact for eventually periodic words.
bool is_self_admissible(const InfiniteWord& w);
/// Self-admissibility of a finite prefix of an infinite word: every shift is
/// compared with the word over the available length.
bool is_self_admissible_prefix(std::span<const Digit> w);

/// beta > 1 whose infinite expansion of 1 is w (or whose finite expansion is
/// w when w has a zero tail).
PolyRoot parry_invert(const InfiniteWord& w, long precision_bits = kDefaultPrecision);

struct AdmissibleCount {
  Integer count;
  bool renyi_lower = false;  // beta^n <= count, certified
  bool renyi_upper = false;  // count <= beta^{n+1}/(beta-1), certified
};
AdmissibleCount count_admissible(const BetaSystem& beta, std::size_t n);

struct CylinderInterval {
  DigitWord word;
  Polynomial left_element;    // sum w_i beta^{-i}
  Polynomial length_element;  // beta^{-n} times the tail value of the end state
  Scalar left;
  Scalar right;
  Scalar length;
  bool full = false;
  std::size_t state = 0;
};
CylinderInterval cylinder(const BetaSystem& beta, std::span<const Digit> w);
bool is_full(const BetaSystem& beta, std::span<const Digit> w);

/// Approximant: root of 1 = sum_{i<=N} eps*_i z^{-i}.
BetaSystem beta_N(const BetaSystem& beta, std::size_t N);

}  // namespace betadim
