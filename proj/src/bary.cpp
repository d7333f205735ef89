#include "betadim/bary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "betadim/error.hpp"
#include "betadim/kernels.hpp"

namespace betadim {

DigitWord expand_rational(const Integer& p, const Integer& q, unsigned b, std::size_t n) {
  if (b < 2) fail(ErrorCode::InvalidArgument, "base must be at least 2");
  if (p < 0 || q <= p) fail(ErrorCode::InvalidArgument, "expand_rational needs 0 <= p < q");
  DigitWord out;
  out.reserve(n);
  Integer r = p, d;
  for (std::size_t i = 0; i < n; ++i) {
    r *= b;
    mpz_fdiv_qr(d.get_mpz_t(), r.get_mpz_t(), r.get_mpz_t(), q.get_mpz_t());
    out.push_back(static_cast<Digit>(d.get_ui()));
  }
  return out;
}

DigitWord expand_lacunary(unsigned b, const LacunaryRule& rule, std::size_t n) {
  if (b < 2 || b > 256) fail(ErrorCode::InvalidArgument, "base out of range");
  const std::size_t limit = n + 64;
  std::vector<std::uint64_t> counts(limit + 1, 0);
  if (rule.kind == LacunaryRule::Kind::Power) {
    if (rule.v <= 0) fail(ErrorCode::InvalidArgument, "lacunary exponent v must be positive");
    const Rational base = 1 + rule.v;
    Rational power = base;
    Integer pos;
    for (;;) {
      mpz_fdiv_q(pos.get_mpz_t(), power.get_num_mpz_t(), power.get_den_mpz_t());
      if (pos > static_cast<unsigned long>(limit)) break;
      ++counts[pos.get_ui()];
      power *= base;
    }
  } else {
    for (unsigned long j = 1;; ++j) {
      const unsigned long e = j * j;
      if (e >= 63 || (1ULL << e) > limit) break;
      ++counts[1ULL << e];
    }
  }
  DigitWord out(n);
  std::uint64_t carry = 0;
  for (std::size_t p = limit; p >= 1; --p) {
    const std::uint64_t c = counts[p] + carry;
    if (p <= n) out[p - 1] = static_cast<Digit>(c % b);
    carry = c / b;
  }
  return out;
}

BaryExpansion BaryExpansion::rational(const Integer& p, const Integer& q, unsigned b, std::size_t n) {
  return {b, expand_rational(p, q, b, n), "rational " + p.get_str() + "/" + q.get_str()};
}

BaryExpansion BaryExpansion::lacunary(unsigned b, const LacunaryRule& rule, std::size_t n) {
  std::string src = rule.kind == LacunaryRule::Kind::Power ? "lacunary v=" + to_string(rule.v) : "lacunary squared-power";
  return {b, expand_lacunary(b, rule, n), std::move(src)};
}

BaryExpansion BaryExpansion::explicit_digits(unsigned b, DigitWord digits) {
  for (Digit d : digits) {
    if (d >= b) fail(ErrorCode::InvalidArgument, "digit " + std::to_string(d) + " out of range for base " + std::to_string(b));
  }
  return {b, std::move(digits), "explicit"};
}

std::vector<MonotoneRun> monotone_subsequence(std::span<const Run> runs) {
  std::vector<MonotoneRun> out;
  std::int64_t best = -1;
  for (std::size_t j = 0; j < runs.size(); ++j) {
    const Run& r = runs[j];
    if (!r.complete) continue;
    if (r.span() >= best) {
      best = r.span();
      out.push_back({r.n_prime, r.m_prime, j});
    }
  }
  return out;
}

RunDecomposition run_decomposition(std::span<const Digit> digits, unsigned b, RunOptions options) {
  if (b < 2) fail(ErrorCode::InvalidArgument, "base must be at least 2");
  if (digits.size() < 2) fail(ErrorCode::InvalidArgument, "run decomposition needs at least two digits");
  const Digit top = static_cast<Digit>(b - 1);
  std::vector<Digit> kinds{0};
  if (!options.zeros_only) kinds.push_back(top);
  const bool any = std::any_of(digits.begin(), digits.end(), [&](Digit d) {
    return d == 0 || (!options.zeros_only && d == top);
  });
  if (!any) fail(ErrorCode::NoRuns, options.zeros_only ? "no digit equals 0" : "no digit equals 0 or b-1");

  const auto mode = options.records_only ? kernels::ScanMode::Records : kernels::ScanMode::All;
  const bool par = options.parallel && digits.size() >= (1u << 16);
  auto raw = par ? kernels::scan_runs_parallel(digits, kinds, mode) : kernels::scan_runs_serial(digits, kinds, mode);

  RunDecomposition dec;
  dec.base = b;
  dec.horizon = static_cast<std::int64_t>(digits.size());
  dec.records_only = options.records_only;
  dec.runs.reserve(raw.size());
  for (const auto& r : raw) {
    dec.runs.push_back({r.n_prime, r.m_prime, r.digit == 0 ? RunKind::Zeros : RunKind::Top, r.complete});
  }
  dec.monotone = monotone_subsequence(dec.runs);
  return dec;
}

DigitWord outside_digits(const RunDecomposition& dec, std::span<const Digit> digits) {
  if (dec.records_only) fail(ErrorCode::InvalidArgument, "outside_digits needs the full run list");
  DigitWord out;
  std::int64_t pos = 1;
  for (const Run& r : dec.runs) {
    for (; pos <= r.n_prime; ++pos) out.push_back(digits[pos - 1]);
    pos = std::min<std::int64_t>(r.m_prime, dec.horizon + 1);
  }
  for (; pos <= dec.horizon; ++pos) out.push_back(digits[pos - 1]);
  return out;
}

DigitWord reconstruct(const RunDecomposition& dec, std::span<const Digit> outside) {
  if (dec.records_only) fail(ErrorCode::InvalidArgument, "reconstruct needs the full run list");
  const Digit top = static_cast<Digit>(dec.base - 1);
  DigitWord out;
  out.reserve(dec.horizon);
  std::size_t next = 0;
  for (const Run& r : dec.runs) {
    while (static_cast<std::int64_t>(out.size()) < r.n_prime) out.push_back(outside[next++]);
    const Digit d = r.kind == RunKind::Zeros ? 0 : top;
    const std::int64_t end = std::min<std::int64_t>(r.m_prime - 1, dec.horizon);
    while (static_cast<std::int64_t>(out.size()) < end) out.push_back(d);
  }
  while (next < outside.size()) out.push_back(outside[next++]);
  return out;
}

ExponentEstimate estimate_exponents(const RunDecomposition& dec, std::optional<std::size_t> window) {
  const auto& mono = dec.monotone;
  const std::size_t K = mono.size();
  if (K < 2) fail(ErrorCode::InsufficientDepth, "need at least two monotone runs, found " + std::to_string(K));
  ExponentEstimate est;
  est.horizon = dec.horizon;
  for (std::size_t k = 0; k < K; ++k) {
    TrajectoryPoint p;
    p.k = k + 1;
    const long len = static_cast<long>(mono[k].m - mono[k].n);
    p.v_ratio = Rational(len, static_cast<unsigned long>(mono[k].n));
    p.v_ratio.canonicalize();
    if (k + 1 < K) {
      Rational r(len, static_cast<unsigned long>(mono[k + 1].n));
      r.canonicalize();
      p.v_hat_ratio = r;
    }
    est.trajectory.push_back(std::move(p));
  }
  est.window = std::min(K, window.value_or(std::max<std::size_t>(3, K / 2)));
  if (est.window == 0) est.window = 1;
  bool have_v = false, have_v_hat = false;
  for (std::size_t k = K - est.window; k < K; ++k) {
    const auto& p = est.trajectory[k];
    if (!have_v || p.v_ratio > est.v_lower) est.v_lower = p.v_ratio;
    have_v = true;
    if (p.v_hat_ratio && (!have_v_hat || *p.v_hat_ratio < est.v_hat_lower)) {
      est.v_hat_lower = *p.v_hat_ratio;
      have_v_hat = true;
    }
  }
  if (!have_v_hat) est.v_hat_lower = *est.trajectory[K - 2].v_hat_ratio;
  est.k_over_log_n = static_cast<double>(K) / std::log(static_cast<double>(std::max<std::int64_t>(mono.back().n, 2)));
  return est;
}

ExponentEstimate estimate_from_digits(std::span<const Digit> digits, unsigned b, RunOptions options) {
  try {
    return estimate_exponents(run_decomposition(digits, b, options));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoRuns && e.code() != ErrorCode::InsufficientDepth) throw;
    ExponentEstimate est;
    est.horizon = static_cast<std::int64_t>(digits.size());
    est.degenerate = true;
    return est;
  }
}

RelationReport check_relations(const Rational& v, const Rational& v_hat, const Rational& tol) {
  RelationReport r;
  r.v_hat_le_v = v_hat <= v;
  r.v_hat_le_v_over_1pv = v_hat <= v / (1 + v) + tol;
  r.v_ge_v_hat_over_1mv_hat = v_hat < 1 && v >= v_hat / (1 - v_hat) - tol;
  return r;
}

RelationReport check_relations(const ExponentEstimate& est, const Rational& tol) {
  return check_relations(est.v_lower, est.v_hat_lower, tol);
}

DigitSet DigitSet::make(unsigned b, std::vector<unsigned> s) {
  if (b < 3) fail(ErrorCode::InvalidDigitSet, "restricted digit sets need b >= 3");
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (s.size() < 2) fail(ErrorCode::InvalidDigitSet, "digit set needs at least two digits");
  if (s.back() >= b) fail(ErrorCode::InvalidDigitSet, "digit " + std::to_string(s.back()) + " not below base");
  if (s.front() != 0 && s.back() != b - 1) fail(ErrorCode::InvalidDigitSet, "digit set must contain 0 or b-1");
  DigitSet out;
  out.base = b;
  for (unsigned d : s) out.digits.push_back(static_cast<Digit>(d));
  return out;
}

bool DigitSet::contains(Digit d) const { return std::binary_search(digits.begin(), digits.end(), d); }

std::string DigitSet::to_string() const {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < digits.size(); ++i) os << (i ? "," : "") << static_cast<unsigned>(digits[i]);
  os << "}";
  return os.str();
}

}  // namespace betadim
