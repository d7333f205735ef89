#pragma once

// Cantor-type constructions: the scheduled zero blocks (n_k, m_k) with
// periodic marker digits, realised in base b, on a restricted digit set, in a
// beta-shift with 0^N 1 0^N markers, and as expansions of 1 in parameter
// space.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "betadim/bary.hpp"
#include "betadim/beta_shift.hpp"
#include "betadim/digits.hpp"
#include "betadim/numerics.hpp"

namespace betadim {

struct ScheduledRuns {
  Rational theta;
  Rational v_hat;
  std::size_t stages = 0;  // K; vectors below are indexed by k-1

  /// n_k, m_k, t_k for k = 1..K+1 (one extra stage closes stage K).
  std::vector<std::int64_t> n, m, t;
  /// Width of a marker in the b-ary word: 1, or 2 for the "10" block.
  int marker_width = 1;

  /// beta layout with 0^N 1 0^N blocks (N = 0: no beta layout).
  std::size_t N = 0;
  std::vector<std::int64_t> l, h, delta, u;

  std::int64_t span(std::size_t k) const { return m[k - 1] - n[k - 1]; }
  /// Length of the word holding stages 1..K: n_{K+1} - 1, or l_{K+1} - 1.
  std::int64_t length() const;
};

/// n'_k = floor(theta^k), m'_k = floor((theta vhat + 1) n'_k), then
/// n_k := max(n'_k, m_{k-1}) and m_k := n_k + max(m'_k - n'_k, m_{k-1} - n_{k-1}, 2).
/// t_k is the largest t >= 0 with m_k + t (m_k - n_k) + marker_width - 1 < n_{k+1}.
/// InfeasibleParameters unless 0 < vhat < 1 and theta >= 1/(1-vhat).
ScheduledRuns schedule(const Rational& theta, const Rational& v_hat, std::size_t stages, int marker_width = 1);

/// Adds l_k, h_k, delta_k, u_k for marker blocks 0^N 1 0^N. Requires
/// m_k < n_{k+1} for every stage.
ScheduledRuns with_beta_layout(ScheduledRuns s, std::size_t N);

/// k with n_k <= position < n_{k+1} (b-ary coordinates), 0 before n_1.
std::size_t stage_of(const ScheduledRuns& s, std::int64_t position);

struct FillPolicy {
  enum class Kind { Constant, Random, Stream };
  Kind kind = Kind::Random;
  Digit constant = 1;
  std::uint64_t seed = 1;
  /// Digit proposed for a 1-based free position.
  std::function<Digit(std::int64_t)> stream;

  static FillPolicy constant_digit(Digit d) { return {Kind::Constant, d, 0, {}}; }
  static FillPolicy random(std::uint64_t seed) { return {Kind::Random, 0, seed, {}}; }
  static FillPolicy from_stream(std::function<Digit(std::int64_t)> f) { return {Kind::Stream, 0, 0, std::move(f)}; }
  std::string describe() const;
};

struct ClampEvent {
  std::int64_t position = 0;
  Digit proposed = 0;
  Digit used = 0;
  std::string reason;
};

struct ClampLog {
  std::size_t count = 0;
  std::size_t unresolved = 0;  // no replacement digit kept the run short
  std::vector<ClampEvent> first;  // first kMaxKept events
  static constexpr std::size_t kMaxKept = 64;
  void add(ClampEvent e);
};

struct ConstructionSpec {
  Rational theta;
  Rational v_hat;
  FillPolicy fill;
  std::size_t stages = 6;
  /// Raw digit count; overrides `stages` (the schedule is extended until it
  /// covers the requested length and the last stage may be cut).
  std::optional<std::int64_t> digits;
};

struct GeneratedWord {
  DigitWord digits;
  ScheduledRuns schedule;
  ClampLog clamps;
  /// 1 where the digit was prescribed by the construction.
  std::vector<std::uint8_t> fixed;
  bool last_stage_complete = true;
};

/// b-ary word: a_{n_k} = a_{m_k} = 1, zeros between, marker 1 at
/// m_k + t(m_k - n_k) for 1 <= t <= t_k ("10" block when b = 2). Free digits
/// come from the fill policy; a free digit that would stretch a run of 0 or
/// b-1 to the constructed run length is replaced and logged.
GeneratedWord generate_bary(const ConstructionSpec& spec, unsigned b);

/// Same layout with free digits drawn from S and markers equal to 1 when
/// 1 is in S, else the smallest nonzero element of S.
GeneratedWord generate_restricted(const ConstructionSpec& spec, const DigitSet& S);

/// Marker digit used by generate_restricted.
Digit marker_digit(const DigitSet& S);

/// beta word: every marker 1 becomes 0^N 1 0^N; free blocks are words of
/// Sigma_{beta_N}, sampled uniformly through the automaton for the Random
/// policy. An all-zero free block long enough to merge with the adjacent
/// 0^N blocks into a constructed-length run gets a leading 1 (logged).
struct BetaConstruction {
  GeneratedWord word;
  BetaSystem beta;
  BetaSystem beta_N;
};
BetaConstruction generate_beta(const ConstructionSpec& spec, const BetaSystem& beta, std::size_t N);

/// Free positions of the beta layout as maximal blocks, in order, up to
/// s.length(). `stage` names the constructed run that bounds the block's zero
/// runs (stage 1 for the prefix before l_1).
struct FreeBlock {
  std::int64_t start = 0;  // 1-based
  std::int64_t length = 0;
  std::size_t stage = 1;
  bool left_zeros = false;  // preceded by a 0^N block
};
std::vector<FreeBlock> beta_free_blocks(const ScheduledRuns& s);

/// Free positions <= n in the b-ary layout (the measure exponent e(n)).
std::int64_t free_positions(const ScheduledRuns& s, std::int64_t n);

struct ParameterSpaceResult {
  DigitWord word;  // eps*_1..eps*_N 0^N a
  DigitWord tail;  // a
  BetaSystem beta_tilde;  // root of 1 = sum_{i<=N} eps*_i z^{-i}
  PolyRoot beta;  // root whose finite expansion of 1 is `word`
  bool self_admissible = false;
  bool lex_below_beta1 = false;
  bool admissible_beta2 = false;
  std::optional<bool> above_beta0;  // certified numerically
  std::optional<bool> below_beta1;
  bool certified() const;
};

/// The tail `a` comes from generate_beta(beta1, N) unless `tail` is given.
/// PrefixConditionFailed when eps*_N(beta1) = 0 or d_{beta0}(1) is not
/// lexicographically below eps*_1..eps*_N; InvalidArgument unless
/// beta0 < beta1 < beta2 with beta2 of finite type.
ParameterSpaceResult generate_parameter_space(const BetaSystem& beta0, const BetaSystem& beta1,
                                              const BetaSystem& beta2, std::size_t N,
                                              const ConstructionSpec& spec,
                                              std::optional<DigitWord> tail = {});

}  // namespace betadim
