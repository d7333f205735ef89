#include "betadim/constructions.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <random>
#include <sstream>

#include "betadim/error.hpp"
#include "betadim/kernels.hpp"

namespace betadim {

namespace {

constexpr std::int64_t kMaxIndex = std::int64_t{1} << 62;

std::int64_t floor_to_int64(const Rational& q) {
  Integer f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  if (f > Integer(std::to_string(kMaxIndex))) fail(ErrorCode::DepthExceeded, "schedule index exceeds 2^62");
  return f.get_si();
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void compute_markers(ScheduledRuns& s) {
  s.t.assign(s.n.size(), 0);
  for (std::size_t i = 0; i + 1 < s.n.size(); ++i) {
    const std::int64_t room = s.n[i + 1] - s.m[i] - (s.marker_width - 1);
    s.t[i] = room > 0 ? (room - 1) / (s.m[i] - s.n[i]) : 0;
  }
}

}  // namespace

std::int64_t ScheduledRuns::length() const {
  if (N > 0) return l[stages] - 1;
  return n[stages] - 1;
}

ScheduledRuns schedule(const Rational& theta, const Rational& v_hat, std::size_t stages, int marker_width) {
  if (v_hat <= 0 || v_hat >= 1) fail(ErrorCode::InfeasibleParameters, "vhat must lie in (0,1)");
  if (theta * (1 - v_hat) < 1) {
    fail(ErrorCode::InfeasibleParameters, "theta = " + to_string(theta) + " is below 1/(1-vhat) = " + to_string(Rational(1 / (1 - v_hat))));
  }
  if (stages == 0) fail(ErrorCode::InvalidArgument, "schedule needs at least one stage");
  if (marker_width != 1 && marker_width != 2) fail(ErrorCode::InvalidArgument, "marker width is 1 or 2");
  ScheduledRuns s;
  s.theta = theta;
  s.v_hat = v_hat;
  s.stages = stages;
  s.marker_width = marker_width;
  const Rational grow = theta * v_hat + 1;
  Rational power = 1;
  // one extra stage so that t_{K+1} is defined as well
  for (std::size_t k = 1; k <= stages + 2; ++k) {
    power *= theta;
    const std::int64_t np = floor_to_int64(power);
    const std::int64_t mp = floor_to_int64(grow * Rational(std::to_string(np)));
    std::int64_t n = np, span = mp - np;
    if (!s.n.empty()) {
      n = std::max(n, s.m.back());
      span = std::max(span, s.m.back() - s.n.back());
    }
    span = std::max<std::int64_t>(span, 2);
    if (n > kMaxIndex - span) fail(ErrorCode::DepthExceeded, "schedule index exceeds 2^62");
    s.n.push_back(n);
    s.m.push_back(n + span);
  }
  compute_markers(s);
  s.n.pop_back();
  s.m.pop_back();
  s.t.pop_back();
  return s;
}

ScheduledRuns with_beta_layout(ScheduledRuns s, std::size_t N) {
  if (N == 0) fail(ErrorCode::InvalidArgument, "N must be positive");
  if (s.marker_width != 1) fail(ErrorCode::InvalidArgument, "beta layout uses single-digit markers");
  const std::int64_t n2 = 2 * static_cast<std::int64_t>(N);
  s.N = N;
  s.l.clear();
  s.h.clear();
  s.delta.clear();
  s.u.clear();
  std::int64_t marker_sum = 0;
  for (std::size_t i = 0; i < s.n.size(); ++i) {
    if (i + 1 < s.n.size() && s.m[i] >= s.n[i + 1]) {
      fail(ErrorCode::InfeasibleParameters, "beta layout needs m_k < n_{k+1}; stage " + std::to_string(i + 1) + " shares its marker");
    }
    const auto k = static_cast<std::int64_t>(i + 1);
    s.l.push_back(s.n[i] + (2 * k - 2) * n2 + marker_sum);
    s.h.push_back(s.m[i] + 2 * k * n2 + marker_sum);
    s.delta.push_back(s.m[i] - s.n[i] - 1);
    s.u.push_back(s.h.back() + s.t[i] * (s.m[i] - s.n[i]) + n2 * s.t[i]);
    marker_sum += n2 * s.t[i];
  }
  return s;
}

std::vector<FreeBlock> beta_free_blocks(const ScheduledRuns& s) {
  if (s.N == 0) fail(ErrorCode::InvalidArgument, "schedule has no beta layout");
  const auto n2 = 2 * static_cast<std::int64_t>(s.N);
  std::vector<FreeBlock> out;
  if (s.l[0] > 1) out.push_back({1, s.l[0] - 1, 1, false});
  for (std::size_t i = 0; i < s.stages; ++i) {
    std::int64_t p = s.h[i];
    for (std::int64_t t = 1; t <= s.t[i]; ++t) {
      out.push_back({p + 1, s.delta[i], i + 1, true});
      p += s.delta[i] + n2 + 1;
    }
    if (s.l[i + 1] - s.u[i] - 1 > 0) out.push_back({s.u[i] + 1, s.l[i + 1] - s.u[i] - 1, i + 1, true});
  }
  return out;
}

std::int64_t free_positions(const ScheduledRuns& s, std::int64_t n) {
  if (s.N != 0) fail(ErrorCode::InvalidArgument, "free_positions is for the b-ary layout");
  std::int64_t fixed = 0;
  std::int64_t last = 0;  // last fixed position counted
  for (std::size_t i = 0; i < s.n.size() && s.n[i] <= n; ++i) {
    const std::int64_t from = std::max(s.n[i], last + 1);
    const std::int64_t to = std::min(s.m[i], n);
    if (to >= from) fixed += to - from + 1;
    last = std::max(last, s.m[i]);
    const std::int64_t span = s.m[i] - s.n[i];
    if (n >= s.m[i] + span) {
      const std::int64_t t = std::min(s.t[i], (n - s.m[i]) / span);
      fixed += t * s.marker_width;
      if (s.marker_width == 2 && t > 0 && s.m[i] + t * span + 1 > n) --fixed;
    }
  }
  return n - fixed;
}

std::size_t stage_of(const ScheduledRuns& s, std::int64_t position) {
  auto it = std::upper_bound(s.n.begin(), s.n.end(), position);
  return static_cast<std::size_t>(it - s.n.begin());
}

std::string FillPolicy::describe() const {
  switch (kind) {
    case Kind::Constant: return "constant:" + std::to_string(constant);
    case Kind::Random: return "random:" + std::to_string(seed);
    case Kind::Stream: return "stream";
  }
  return "?";
}

void ClampLog::add(ClampEvent e) {
  ++count;
  if (first.size() < kMaxKept) first.push_back(std::move(e));
}

bool ParameterSpaceResult::certified() const {
  return self_admissible && lex_below_beta1 && above_beta0.value_or(false) && below_beta1.value_or(false);
}

namespace {

// Schedule long enough to hold `digits` positions in the chosen coordinates.
ScheduledRuns schedule_for(const ConstructionSpec& spec, int marker_width, std::size_t N) {
  std::size_t stages = spec.stages;
  for (;;) {
    ScheduledRuns s = schedule(spec.theta, spec.v_hat, stages, marker_width);
    if (N > 0) s = with_beta_layout(std::move(s), N);
    if (!spec.digits || s.length() >= *spec.digits) return s;
    ++stages;
  }
}

struct Layout {
  std::vector<Digit> alphabet;   // free digits
  std::array<bool, 256> in_run{};  // digits whose runs are constrained
  Digit marker = 1;
  int marker_width = 1;
};

void place_fixed(const ScheduledRuns& s, const Layout& lay, DigitWord& w, std::vector<std::uint8_t>& fixed) {
  const auto L = static_cast<std::int64_t>(w.size());
  auto put = [&](std::int64_t pos, Digit d) {
    if (pos >= 1 && pos <= L) {
      w[pos - 1] = d;
      fixed[pos - 1] = 1;
    }
  };
  for (std::size_t i = 0; i < s.n.size() && s.n[i] <= L; ++i) {
    put(s.n[i], lay.marker);
    for (std::int64_t p = s.n[i] + 1; p < s.m[i] && p <= L; ++p) put(p, 0);
    put(s.m[i], lay.marker);
    const std::int64_t span = s.m[i] - s.n[i];
    for (std::int64_t t = 1; t <= s.t[i]; ++t) {
      const std::int64_t p = s.m[i] + t * span;
      put(p, lay.marker);
      if (lay.marker_width == 2) put(p + 1, 0);
    }
  }
}

// Replaces free digits that would stretch a constrained run beyond the limit
// of the current stage: max(m_k - n_k - 2, 1), with stage 1 governing the
// prefix before n_1.
void clamp_runs(const ScheduledRuns& s, const Layout& lay, DigitWord& w, const std::vector<std::uint8_t>& fixed,
                ClampLog& log) {
  const std::size_t L = w.size();
  std::vector<Digit> order;
  for (Digit d : lay.alphabet)
    if (!lay.in_run[d]) order.push_back(d);
  for (Digit d : lay.alphabet)
    if (lay.in_run[d]) order.push_back(d);

  Digit cur = 0;
  std::int64_t cur_len = 0;
  std::size_t stage = 0;  // index into s.n of the next n_k not yet reached
  auto run_len = [&](std::size_t i, Digit x) -> std::int64_t {
    if (!lay.in_run[x]) return 0;
    std::size_t j = i + 1;
    while (j < L && fixed[j] && w[j] == x) ++j;
    return (cur_len > 0 && cur == x ? cur_len : 0) + 1 + static_cast<std::int64_t>(j - i - 1);
  };
  auto ok = [&](std::size_t i, Digit x, std::int64_t limit) { return run_len(i, x) <= limit; };
  for (std::size_t i = 0; i < L; ++i) {
    const auto pos = static_cast<std::int64_t>(i + 1);
    while (stage < s.n.size() && s.n[stage] <= pos) ++stage;
    if (!fixed[i]) {
      const std::size_t k = stage == 0 ? 0 : stage - 1;
      const std::int64_t limit = std::max<std::int64_t>(s.m[k] - s.n[k] - 2, 1);
      const Digit x = w[i];
      if (!ok(i, x, limit)) {
        bool placed = false;
        for (Digit y : order) {
          if (y != x && ok(i, y, limit)) {
            w[i] = y;
            log.add({pos, x, y, "run limit " + std::to_string(limit)});
            placed = true;
            break;
          }
        }
        if (!placed) {
          Digit best = x;
          for (Digit y : order)
            if (run_len(i, y) < run_len(i, best)) best = y;
          w[i] = best;
          ++log.unresolved;
          log.add({pos, x, best, "no digit keeps the run below " + std::to_string(limit)});
        }
      }
    }
    if (cur_len > 0 && w[i] == cur) {
      ++cur_len;
    } else {
      cur = w[i];
      cur_len = 1;
    }
  }
}

GeneratedWord generate_layout(const ConstructionSpec& spec, const Layout& lay) {
  GeneratedWord out;
  out.schedule = schedule_for(spec, lay.marker_width, 0);
  const std::int64_t L = spec.digits.value_or(out.schedule.length());
  if (L < 1) fail(ErrorCode::InvalidArgument, "construction needs at least one digit");
  out.last_stage_complete = L >= out.schedule.length() || !spec.digits;
  if (spec.digits && L < out.schedule.length()) out.last_stage_complete = false;
  out.digits.assign(static_cast<std::size_t>(L), 0);
  out.fixed.assign(static_cast<std::size_t>(L), 0);
  auto allowed = [&](Digit d) { return std::find(lay.alphabet.begin(), lay.alphabet.end(), d) != lay.alphabet.end(); };
  switch (spec.fill.kind) {
    case FillPolicy::Kind::Random:
      kernels::random_fill_parallel(out.digits, lay.alphabet, spec.fill.seed);
      break;
    case FillPolicy::Kind::Constant:
      if (!allowed(spec.fill.constant)) fail(ErrorCode::InvalidArgument, "fill digit outside the alphabet");
      std::fill(out.digits.begin(), out.digits.end(), spec.fill.constant);
      break;
    case FillPolicy::Kind::Stream:
      for (std::int64_t p = 1; p <= L; ++p) {
        const Digit d = spec.fill.stream(p);
        if (!allowed(d)) fail(ErrorCode::InvalidArgument, "stream digit outside the alphabet at " + std::to_string(p));
        out.digits[p - 1] = d;
      }
      break;
  }
  place_fixed(out.schedule, lay, out.digits, out.fixed);
  clamp_runs(out.schedule, lay, out.digits, out.fixed, out.clamps);
  return out;
}

}  // namespace

GeneratedWord generate_bary(const ConstructionSpec& spec, unsigned b) {
  if (b < 2 || b > 256) fail(ErrorCode::InvalidArgument, "base out of range");
  Layout lay;
  for (unsigned d = 0; d < b; ++d) lay.alphabet.push_back(static_cast<Digit>(d));
  lay.in_run[0] = lay.in_run[b - 1] = true;
  lay.marker = 1;
  lay.marker_width = b == 2 ? 2 : 1;
  return generate_layout(spec, lay);
}

Digit marker_digit(const DigitSet& S) {
  if (S.contains(1)) return 1;
  for (Digit d : S.digits)
    if (d != 0) return d;
  fail(ErrorCode::InvalidDigitSet, "digit set has no nonzero element");
}

GeneratedWord generate_restricted(const ConstructionSpec& spec, const DigitSet& S) {
  const DigitSet checked = DigitSet::make(S.base, std::vector<unsigned>(S.digits.begin(), S.digits.end()));
  Layout lay;
  lay.alphabet = checked.digits;
  lay.in_run[0] = lay.in_run[checked.base - 1] = true;
  lay.marker = marker_digit(checked);
  return generate_layout(spec, lay);
}

namespace {

// Uniform sampling of accepted words of a given length from state 0, using
// normalised completion counts; beyond kRows the count ratios are frozen at
// their kRows value.
class BlockSampler {
 public:
  explicit BlockSampler(const AdmissibilityAutomaton& a) : a_(a), top_(a.alphabet_top) {
    const std::size_t S = a.num_states;
    rows_.assign(kRows + 1, std::vector<double>(S, 1.0));
    for (std::size_t r = 1; r <= kRows; ++r) {
      double hi = 0;
      for (std::size_t s = 0; s < S; ++s) {
        double acc = 0;
        for (unsigned d = 0; d <= top_; ++d) {
          if (auto nx = a.step(s, static_cast<Digit>(d))) acc += rows_[r - 1][*nx];
        }
        rows_[r][s] = acc;
        hi = std::max(hi, acc);
      }
      for (auto& x : rows_[r]) x /= hi;
    }
  }

  void sample(std::mt19937_64& rng, std::span<Digit> out) const {
    std::size_t s = 0;
    std::uniform_real_distribution<double> u(0, 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto& row = rows_[std::min(out.size() - i - 1, kRows)];
      double total = 0;
      for (unsigned d = 0; d <= top_; ++d)
        if (auto nx = a_.step(s, static_cast<Digit>(d))) total += row[*nx];
      double x = u(rng) * total;
      Digit pick = 0;
      for (unsigned d = 0; d <= top_; ++d) {
        if (auto nx = a_.step(s, static_cast<Digit>(d))) {
          pick = static_cast<Digit>(d);
          x -= row[*nx];
          if (x < 0) break;
        }
      }
      out[i] = pick;
      s = *a_.step(s, pick);
    }
  }

 private:
  static constexpr std::size_t kRows = 256;
  const AdmissibilityAutomaton& a_;
  unsigned top_;
  std::vector<std::vector<double>> rows_;
};


// Longest zero run touching the block, with `left`/`right` zeros of fixed
// context on either side. The leading run is ignored when it would start at
// position 1 (no left bound).
std::int64_t longest_zero_run(std::span<const Digit> w, std::int64_t left, std::int64_t right, bool leading_counts) {
  std::int64_t best = 0, cur = left;
  bool leading = true;
  for (Digit d : w) {
    if (d == 0) {
      ++cur;
      continue;
    }
    if (!leading || leading_counts) best = std::max(best, cur);
    leading = false;
    cur = 0;
  }
  if (!leading || leading_counts) best = std::max(best, cur + right);
  return best;
}

}  // namespace

BetaConstruction generate_beta(const ConstructionSpec& spec, const BetaSystem& beta, std::size_t N) {
  BetaSystem bn = beta_N(beta, N);
  const AdmissibilityAutomaton& aut = bn.automaton();
  GeneratedWord out;
  out.schedule = schedule_for(spec, 1, N);
  const ScheduledRuns& s = out.schedule;
  const std::int64_t L = spec.digits.value_or(s.length());
  if (L < 1) fail(ErrorCode::InvalidArgument, "construction needs at least one digit");
  out.last_stage_complete = L >= s.length();
  out.digits.assign(static_cast<std::size_t>(L), 0);
  out.fixed.assign(static_cast<std::size_t>(L), 0);
  const auto n = static_cast<std::int64_t>(N);

  for (std::size_t i = 0; i < s.l.size() && s.l[i] <= L; ++i) {
    auto fixed_block = [&](std::int64_t from) {
      for (std::int64_t p = from; p <= from + 2 * n && p <= L; ++p) {
        out.fixed[p - 1] = 1;
        out.digits[p - 1] = p == from + n ? 1 : 0;
      }
    };
    fixed_block(s.l[i]);
    for (std::int64_t p = s.l[i] + 2 * n + 1; p < s.h[i] - 2 * n && p <= L; ++p) out.fixed[p - 1] = 1;
    fixed_block(s.h[i] - 2 * n);
    for (std::int64_t t = 1; t <= s.t[i]; ++t) fixed_block(s.h[i] + t * (s.delta[i] + 1 + 2 * n) - 2 * n);
  }
  const std::vector<FreeBlock> blocks = beta_free_blocks(s);

  BlockSampler sampler(aut);
  DigitWord buf;
  for (const FreeBlock& fb : blocks) {
    if (fb.start > L || fb.length <= 0) continue;
    const std::int64_t len = std::min(fb.length, L - fb.start + 1);
    const std::int64_t limit = s.delta[fb.stage - 1] + 2 * n;
    const std::int64_t right = fb.start + fb.length - 1 < L ? n : 0;
    const std::int64_t left = fb.left_zeros ? n : 0;
    buf.assign(static_cast<std::size_t>(len), 0);
    auto fill_once = [&](int attempt) {
      switch (spec.fill.kind) {
        case FillPolicy::Kind::Random: {
          std::mt19937_64 rng(mix(spec.fill.seed ^ mix(static_cast<std::uint64_t>(fb.start) * 131 + attempt)));
          sampler.sample(rng, buf);
          break;
        }
        case FillPolicy::Kind::Constant:
        case FillPolicy::Kind::Stream: {
          std::size_t st = 0;
          for (std::int64_t j = 0; j < len; ++j) {
            const std::int64_t pos = fb.start + j;
            Digit d = spec.fill.kind == FillPolicy::Kind::Constant ? spec.fill.constant : spec.fill.stream(pos);
            Digit used = std::min<Digit>(d, aut.alphabet_top);
            while (used > 0 && !aut.step(st, used)) --used;
            if (used != d) out.clamps.add({pos, d, used, "not admissible in Sigma_{beta_N}"});
            buf[j] = used;
            st = *aut.step(st, used);
          }
          break;
        }
      }
    };
    fill_once(0);
    auto too_long = [&] { return longest_zero_run(buf, left, right, fb.left_zeros) >= limit; };
    for (int attempt = 1; too_long() && attempt < 16 && spec.fill.kind == FillPolicy::Kind::Random; ++attempt) {
      out.clamps.add({fb.start, 0, 0, "resampled free block (zero run too long)"});
      fill_once(attempt);
    }
    if (too_long()) {
      for (std::int64_t j = 0; j < len; ++j) buf[j] = j % (n + 1) == 0 ? 1 : 0;
      out.clamps.add({fb.start, 0, 1, "free block replaced by (1 0^N)*"});
    }
    std::copy(buf.begin(), buf.end(), out.digits.begin() + (fb.start - 1));
  }
  return {std::move(out), beta, std::move(bn)};
}

ParameterSpaceResult generate_parameter_space(const BetaSystem& beta0, const BetaSystem& beta1,
                                              const BetaSystem& beta2, std::size_t N,
                                              const ConstructionSpec& spec, std::optional<DigitWord> tail) {
  if (N == 0) fail(ErrorCode::InvalidArgument, "N must be positive");
  auto lt01 = certified_less(beta0.value(), beta1.value());
  auto lt12 = certified_less(beta1.value(), beta2.value());
  if (!lt01.value_or(false) || !lt12.value_or(false)) {
    fail(ErrorCode::InvalidArgument, "need beta0 < beta1 < beta2 (certified)");
  }
  if (!beta2.finite_type()) fail(ErrorCode::InvalidArgument, "beta2 must give a subshift of finite type");
  const DigitWord eps = expansion_of_one_star(beta1, N);
  if (eps.back() == 0) fail(ErrorCode::PrefixConditionFailed, "eps*_N(beta1) = 0 for N = " + std::to_string(N));
  const DigitWord d0 = beta0.expansion_of_one(N);
  if (lex_compare_prefix(d0, eps) >= 0) {
    fail(ErrorCode::PrefixConditionFailed, "d_beta0(1) is not below eps*_1..eps*_N for N = " + std::to_string(N));
  }
  BetaSystem tilde = beta_N(beta1, N);
  DigitWord a = tail ? std::move(*tail) : generate_beta(spec, beta1, N).word.digits;
  DigitWord word = eps;
  word.insert(word.end(), N, 0);
  word.insert(word.end(), a.begin(), a.end());
  while (!word.empty() && word.back() == 0) word.pop_back();

  PolyRoot root = parry_invert(InfiniteWord::finite(word));
  ParameterSpaceResult r{word, a, tilde, root, false, false, false, std::nullopt, std::nullopt};
  r.word.resize(eps.size() + N + a.size(), 0);
  r.self_admissible = is_self_admissible(InfiniteWord::finite(r.word));
  r.lex_below_beta1 = lex_compare_prefix(r.word, beta1.expansion_of_one(r.word.size())) < 0;
  r.admissible_beta2 = is_admissible(beta2, r.word);
  r.above_beta0 = certified_less(beta0.value(), root.value());
  r.below_beta1 = certified_less(root.value(), beta1.value());
  return r;
}

}  // namespace betadim
