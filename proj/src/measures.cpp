#include "betadim/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

#include "betadim/error.hpp"

namespace betadim {

namespace {

Rational ratio(std::int64_t a, std::int64_t b) {
  Rational q(Integer(std::to_string(a)), Integer(std::to_string(b)));
  q.canonicalize();
  return q;
}

void check_depth(const ScheduledRuns& s, std::int64_t n) {
  if (n < 0) fail(ErrorCode::InvalidArgument, "depth must be non-negative");
  if (n > s.length()) {
    fail(ErrorCode::DepthExceeded, "depth " + std::to_string(n) + " exceeds the schedule length " + std::to_string(s.length()));
  }
}

// Counts #Sigma^j from state 0, memoised per call site.
class CountCache {
 public:
  explicit CountCache(const AdmissibilityAutomaton& a) : a_(a) {}
  const Integer& operator()(std::int64_t j) {
    auto it = cache_.find(j);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(j, a_.count(static_cast<std::size_t>(j))).first->second;
  }

 private:
  const AdmissibilityAutomaton& a_;
  std::map<std::int64_t, Integer> cache_;
};

void add_factor(MeasureValue& mv, CountCache& counts, std::int64_t len, std::int64_t mult = 1) {
  if (len <= 0 || mult <= 0) return;
  for (auto& f : mv.factors) {
    if (f.length == len) {
      f.multiplicity += mult;
      return;
    }
  }
  mv.factors.push_back({len, counts(len), mult});
}

// Digit prescribed at each 1-based position of the b-ary layout, -1 if free.
std::vector<int> prescribed(const ScheduledRuns& s, Digit marker, std::int64_t len) {
  std::vector<int> out(static_cast<std::size_t>(len), -1);
  auto put = [&](std::int64_t p, int d) {
    if (p >= 1 && p <= len) out[p - 1] = d;
  };
  for (std::size_t i = 0; i < s.n.size() && s.n[i] <= len; ++i) {
    put(s.n[i], marker);
    for (std::int64_t p = s.n[i] + 1; p < s.m[i] && p <= len; ++p) put(p, 0);
    put(s.m[i], marker);
    const std::int64_t span = s.m[i] - s.n[i];
    for (std::int64_t t = 1; t <= s.t[i]; ++t) {
      put(s.m[i] + t * span, marker);
      if (s.marker_width == 2) put(s.m[i] + t * span + 1, 0);
    }
  }
  return out;
}

Scalar log_of(const Integer& x, long bits) { return Scalar::from_rational(Rational(x), bits).log(); }

void mark_convergence(DimensionReport& r) {
  const double lim = r.limit.midpoint();
  const double tol = r.tolerance.get_d();
  std::optional<std::size_t> first;
  for (const auto& p : r.trajectory) {
    const double width = Rational(p.ratio.upper().to_rational() - p.ratio.lower().to_rational()).get_d();
    const bool inside = std::abs(p.ratio.midpoint() - lim) <= tol && width < tol / 10;
    if (!inside) {
      first.reset();
    } else if (!first) {
      first = p.k;
    }
  }
  r.converged_at = first;
}

DimensionReport bary_report(const ScheduledRuns& s, std::size_t K, const Scalar& factor, bool exact_factor,
                            const Rational& tol, std::string params) {
  if (K == 0 || K > s.stages) {
    fail(ErrorCode::DepthExceeded, "K = " + std::to_string(K) + " outside the schedule's " + std::to_string(s.stages) + " stages");
  }
  DimensionReport r;
  r.params = std::move(params);
  r.formula_value = dim_formula(s.theta, s.v_hat);
  r.factor = factor;
  r.limit = Scalar::from_rational(r.formula_value) * factor;
  r.tolerance = tol;
  for (std::size_t k = 1; k <= K; ++k) {
    DimensionPoint p;
    p.k = k;
    p.depth = s.m[k - 1];
    const Rational q = ratio(free_positions(s, p.depth), p.depth);
    if (exact_factor) p.exact = q;
    p.ratio = Scalar::from_rational(q) * factor;
    r.trajectory.push_back(std::move(p));
  }
  mark_convergence(r);
  return r;
}

}  // namespace

Rational MeasureValue::exact() const {
  Integer den = 1;
  if (base != 0) {
    mpz_pow_ui(den.get_mpz_t(), Integer(base).get_mpz_t(), static_cast<unsigned long>(exponent));
  } else {
    for (const auto& f : factors) {
      Integer p;
      mpz_pow_ui(p.get_mpz_t(), f.count.get_mpz_t(), static_cast<unsigned long>(f.multiplicity));
      den *= p;
    }
  }
  return Rational(Integer(1), den);
}

Scalar MeasureValue::log_mu(long bits) const {
  if (base != 0) return -(Scalar::from_integer(exponent) * log_of(Integer(base), bits));
  Scalar acc = Scalar::from_integer(0);
  for (const auto& f : factors) acc = acc + Scalar::from_integer(f.multiplicity) * log_of(f.count, bits);
  return -acc;
}

MeasureValue measure_bary(const ScheduledRuns& s, unsigned alphabet_size, std::int64_t n) {
  if (alphabet_size < 2) fail(ErrorCode::InvalidArgument, "alphabet needs at least two digits");
  if (s.N != 0) fail(ErrorCode::InvalidArgument, "schedule carries a beta layout");
  check_depth(s, n);
  return {n, free_positions(s, n), alphabet_size, {}};
}

MeasureValue measure_restricted(const ScheduledRuns& s, const DigitSet& S, std::int64_t n) {
  if (s.marker_width != 1) fail(ErrorCode::InvalidArgument, "restricted layout uses single-digit markers");
  return measure_bary(s, static_cast<unsigned>(S.digits.size()), n);
}

MeasureValue measure_beta(const ScheduledRuns& s, const BetaSystem& beta_N, std::int64_t n) {
  check_depth(s, n);
  CountCache counts(beta_N.automaton());
  MeasureValue mv;
  mv.depth = n;
  for (const FreeBlock& fb : beta_free_blocks(s)) {
    if (fb.start > n) break;
    const std::int64_t len = std::min(fb.length, n - fb.start + 1);
    add_factor(mv, counts, len);
    mv.exponent += len;
  }
  return mv;
}

MeasureValue measure_beta_closed_form(const ScheduledRuns& s, const BetaSystem& beta_N, std::size_t k) {
  if (s.N == 0) fail(ErrorCode::InvalidArgument, "schedule has no beta layout");
  if (k == 0 || k > s.stages) fail(ErrorCode::DepthExceeded, "stage outside the schedule");
  CountCache counts(beta_N.automaton());
  MeasureValue mv;
  mv.depth = s.h[k - 1];
  add_factor(mv, counts, s.n[0] - 1);
  mv.exponent = s.n[0] - 1;
  for (std::size_t j = 1; j < k; ++j) {
    add_factor(mv, counts, s.delta[j - 1], s.t[j - 1]);
    add_factor(mv, counts, s.l[j] - s.u[j - 1] - 1);
    mv.exponent += s.t[j - 1] * s.delta[j - 1] + s.l[j] - s.u[j - 1] - 1;
  }
  return mv;
}

Rational measure_cylinder_bary(const ScheduledRuns& s, std::span<const Digit> alphabet, Digit marker,
                               std::span<const Digit> word) {
  const auto n = static_cast<std::int64_t>(word.size());
  check_depth(s, n);
  const auto fixed = prescribed(s, marker, n);
  std::int64_t e = 0;
  for (std::int64_t p = 1; p <= n; ++p) {
    const Digit d = word[p - 1];
    if (fixed[p - 1] >= 0) {
      if (d != fixed[p - 1]) fail(ErrorCode::NotInSupport, "digit at " + std::to_string(p) + " differs from the construction");
    } else {
      if (std::find(alphabet.begin(), alphabet.end(), d) == alphabet.end()) {
        fail(ErrorCode::NotInSupport, "free digit at " + std::to_string(p) + " outside the alphabet");
      }
      ++e;
    }
  }
  Integer den;
  mpz_ui_pow_ui(den.get_mpz_t(), alphabet.size(), static_cast<unsigned long>(e));
  return Rational(Integer(1), den);
}

Rational measure_cylinder_beta(const ScheduledRuns& s, const BetaSystem& beta_N, std::span<const Digit> word) {
  const auto n = static_cast<std::int64_t>(word.size());
  check_depth(s, n);
  const auto& aut = beta_N.automaton();
  CountCache counts(aut);
  const auto blocks = beta_free_blocks(s);
  std::vector<std::uint8_t> is_free(static_cast<std::size_t>(n), 0);
  Rational mu = 1;
  for (const FreeBlock& fb : blocks) {
    if (fb.start > n) break;
    const std::int64_t len = std::min(fb.length, n - fb.start + 1);
    for (std::int64_t j = 0; j < len; ++j) is_free[fb.start - 1 + j] = 1;
    auto state = aut.run(word.subspan(fb.start - 1, len));
    if (!state) fail(ErrorCode::NotInSupport, "free block at " + std::to_string(fb.start) + " is not in Sigma_{beta_N}");
    const Integer completions = aut.count(static_cast<std::size_t>(fb.length - len), *state);
    if (completions == 0) fail(ErrorCode::NotInSupport, "free block at " + std::to_string(fb.start) + " has no admissible completion");
    mu *= Rational(completions, counts(fb.length));
  }
  // prescribed digits: 0^N 1 0^N markers, zeros inside the constructed runs
  const auto N = static_cast<std::int64_t>(s.N);
  std::vector<int> expect(static_cast<std::size_t>(n), 0);
  auto one = [&](std::int64_t p) {
    if (p >= 1 && p <= n) expect[p - 1] = 1;
  };
  for (std::size_t i = 0; i < s.l.size() && s.l[i] <= n; ++i) {
    one(s.l[i] + N);
    one(s.h[i] - N);
    for (std::int64_t t = 1; t <= s.t[i]; ++t) one(s.h[i] + t * (s.delta[i] + 1 + 2 * N) - N);
  }
  for (std::int64_t p = 1; p <= n; ++p) {
    if (!is_free[p - 1] && word[p - 1] != expect[p - 1]) {
      fail(ErrorCode::NotInSupport, "digit at " + std::to_string(p) + " differs from the construction");
    }
  }
  mu.canonicalize();
  return mu;
}

Rational dim_formula(const Rational& theta, const Rational& v_hat) {
  if (v_hat < 0 || v_hat > 1) fail(ErrorCode::InfeasibleParameters, "vhat must lie in [0,1]");
  if (v_hat == 1) return 0;
  if (v_hat == 0) {
    if (theta < 1) fail(ErrorCode::InfeasibleParameters, "theta must be at least 1");
    return 1;
  }
  if (theta * (1 - v_hat) < 1) {
    fail(ErrorCode::InfeasibleParameters, "theta = " + to_string(theta) + " is below 1/(1-vhat): the set is empty");
  }
  Rational r = (theta - 1 - theta * v_hat) / ((1 + theta * v_hat) * (theta - 1));
  r.canonicalize();
  return r;
}

Scalar dim_formula(const Rational& theta, const Rational& v_hat, const DigitSet& S, long bits) {
  const Scalar f = log_of(Integer(static_cast<unsigned long>(S.digits.size())), bits) / log_of(Integer(S.base), bits);
  return Scalar::from_rational(dim_formula(theta, v_hat), bits) * f;
}

Rational dim_sup(const Rational& v_hat) {
  if (v_hat < 0 || v_hat > 1) fail(ErrorCode::InfeasibleParameters, "vhat must lie in [0,1]");
  Rational q = (1 - v_hat) / (1 + v_hat);
  q *= q;
  q.canonicalize();
  return q;
}

Rational theta_max(const Rational& v_hat) {
  if (v_hat < 0 || v_hat >= 1) fail(ErrorCode::InfeasibleParameters, "theta_0 needs 0 <= vhat < 1");
  Rational q = 2 / (1 - v_hat);
  q.canonicalize();
  return q;
}

ThetaMaximum verify_theta_maximum(const Rational& v_hat) {
  ThetaMaximum r;
  r.theta0 = theta_max(v_hat);
  r.value = dim_formula(r.theta0, v_hat);
  const Rational& t = r.theta0;
  // f = P/Q, P = (1-vhat) t - 1, Q = vhat t^2 + (1-vhat) t - 1
  const Rational P = (1 - v_hat) * t - 1;
  const Rational Q = v_hat * t * t + (1 - v_hat) * t - 1;
  r.derivative = (1 - v_hat) * Q - P * (2 * v_hat * t + 1 - v_hat);
  r.derivative.canonicalize();
  r.matches_sup = r.value == dim_sup(v_hat);
  const Rational h(1, 1000);
  const Rational lo = t - h;
  r.strict_max = v_hat > 0 && r.value > dim_formula(t + h, v_hat) && (lo * (1 - v_hat) < 1 || r.value > dim_formula(lo, v_hat));
  return r;
}

Rational critical_exponent_s0(const Rational& theta, const Rational& v_hat, const Rational& eps) {
  if (eps < 0 || eps >= 1) fail(ErrorCode::InvalidArgument, "eps must lie in [0,1)");
  Rational q = (1 + eps) / (1 - eps) * dim_formula(theta, v_hat);
  q.canonicalize();
  return q;
}

SeriesProbe probe_series(const Rational& theta, const Rational& v_hat, const Rational& eps, unsigned b, double C,
                         long n_max, double delta) {
  if (n_max < 4) fail(ErrorCode::InvalidArgument, "n_max must be at least 4");
  const Rational s0 = critical_exponent_s0(theta, v_hat, eps);
  const double th = theta.get_d(), vh = v_hat.get_d(), e = eps.get_d();
  const double A = (1 + e) * (th - 1 - th * vh) / (th - 1);
  const double B = (1 + th * vh) * (1 - e);
  const double lb = std::log(static_cast<double>(b));
  auto log_term = [&](long N, double s) {
    const double x = static_cast<double>(N);
    return C * std::log(x) * std::log(2 * x) + x * lb * (A - B * s);
  };
  struct Slopes {
    double term, sum;
  };
  auto slopes = [&](double s) {
    double acc = -INFINITY, at_half = 0;
    const long half = n_max / 2;
    for (long N = 1; N <= n_max; ++N) {
      const double t = log_term(N, s);
      acc = std::max(acc, t) + std::log1p(std::exp(-std::abs(acc - t)));
      if (N == half) at_half = acc;
    }
    const double dn = static_cast<double>(n_max - half);
    return Slopes{(log_term(n_max, s) - log_term(half, s)) / dn, (acc - at_half) / dn};
  };
  SeriesProbe p;
  p.s0 = s0.get_d();
  const Slopes below = slopes(p.s0 - delta), above = slopes(p.s0 + delta);
  p.term_slope_below = below.term;
  p.term_slope_above = above.term;
  p.sum_slope_below = below.sum;
  p.sum_slope_above = above.sum;
  p.sign_flip = below.term > 0 && above.term < 0 && below.sum > 0 && std::abs(above.sum) < below.sum;
  return p;
}

LimitReport limit_along_theta(const Rational& v, const std::vector<Rational>& theta_grid) {
  if (v < 0) fail(ErrorCode::InvalidArgument, "v must be non-negative");
  LimitReport r;
  r.v = v;
  r.limit = 1 / (1 + v);
  r.limit.canonicalize();
  r.matches_rewrite = true;
  r.monotone = true;
  r.below_limit = true;
  std::vector<Rational> grid = theta_grid;
  std::sort(grid.begin(), grid.end());
  for (const Rational& th : grid) {
    Rational vh = v / th;
    vh.canonicalize();
    const Rational val = dim_formula(th, vh);
    Rational rewrite = r.limit * (1 - v / (th - 1));
    rewrite.canonicalize();
    r.matches_rewrite = r.matches_rewrite && val == rewrite;
    if (!r.values.empty()) r.monotone = r.monotone && (v == 0 ? val == r.values.back().second : val > r.values.back().second);
    r.below_limit = r.below_limit && val <= r.limit;
    r.values.emplace_back(th, val);
  }
  return r;
}

DimensionReport local_dimension_bary(const ScheduledRuns& s, unsigned b, std::size_t K, const Rational& tol) {
  if (b < 2) fail(ErrorCode::InvalidArgument, "base must be at least 2");
  if (s.marker_width != (b == 2 ? 2 : 1)) fail(ErrorCode::InvalidArgument, "schedule marker width does not match the base");
  std::ostringstream params;
  params << "bary theta=" << to_string(s.theta) << " vhat=" << to_string(s.v_hat) << " b=" << b;
  return bary_report(s, K, Scalar::from_integer(1), true, tol, params.str());
}

DimensionReport local_dimension_restricted(const ScheduledRuns& s, const DigitSet& S, std::size_t K,
                                           const Rational& tol) {
  if (s.marker_width != 1) fail(ErrorCode::InvalidArgument, "restricted layout uses single-digit markers");
  const Scalar f = log_of(Integer(static_cast<unsigned long>(S.digits.size())), kDefaultPrecision) /
                   log_of(Integer(S.base), kDefaultPrecision);
  std::ostringstream params;
  params << "restricted theta=" << to_string(s.theta) << " vhat=" << to_string(s.v_hat) << " b=" << S.base
         << " S=" << S.to_string();
  return bary_report(s, K, f, false, tol, params.str());
}

DimensionReport local_dimension_beta(const ScheduledRuns& s, const BetaSystem& beta, const BetaSystem& beta_N,
                                     std::size_t K, const Rational& tol) {
  if (s.N == 0) fail(ErrorCode::InvalidArgument, "schedule has no beta layout");
  if (K == 0 || K > s.stages) fail(ErrorCode::DepthExceeded, "K outside the schedule");
  DimensionReport r;
  r.params = "beta=" + beta.label() + " N=" + std::to_string(s.N) + " theta=" + to_string(s.theta) +
             " vhat=" + to_string(s.v_hat);
  r.formula_value = dim_formula(s.theta, s.v_hat);
  const Scalar log_beta = beta.value().log();
  r.factor = beta_N.value().log() / log_beta;
  r.limit = Scalar::from_rational(r.formula_value) * r.factor;
  r.tolerance = tol;
  for (std::size_t k = 1; k <= K; ++k) {
    DimensionPoint p;
    p.k = k;
    p.depth = s.h[k - 1];
    const MeasureValue mv = measure_beta(s, beta_N, p.depth);
    p.ratio = -mv.log_mu() / (Scalar::from_integer(p.depth) * log_beta);
    r.trajectory.push_back(std::move(p));
  }
  mark_convergence(r);
  return r;
}

StolzCesaro stolz_cesaro(const ScheduledRuns& s, std::size_t K) {
  if (K == 0 || K > s.stages) fail(ErrorCode::DepthExceeded, "K outside the schedule");
  StolzCesaro out;
  std::int64_t acc = s.n[0] - 1;
  for (std::size_t k = 1; k <= K; ++k) {
    out.step.push_back(ratio(s.n[k] - s.m[k - 1], s.m[k] - s.m[k - 1]));
    out.cumulative.push_back(ratio(acc, s.m[k - 1]));
    acc += s.n[k] - s.m[k - 1];
  }
  return out;
}

std::string report_json(const DimensionReport& r) {
  nlohmann::json j;
  j["params"] = r.params;
  j["formula_value"] = to_string(r.formula_value);
  j["limit"] = {r.limit.lower().to_string(), r.limit.upper().to_string()};
  auto& traj = j["trajectory"] = nlohmann::json::array();
  for (const auto& p : r.trajectory) {
    nlohmann::json row = {p.k, p.ratio.lower().to_string(), p.ratio.upper().to_string()};
    traj.push_back(row);
  }
  j["converged_at"] = r.converged_at ? nlohmann::json(*r.converged_at) : nlohmann::json(nullptr);
  j["tolerance"] = to_string(r.tolerance);
  return j.dump(2);
}

std::string report_csv(const DimensionReport& r) {
  std::ostringstream os;
  os << "k,depth,exact,lower,upper\n";
  for (const auto& p : r.trajectory) {
    os << p.k << ',' << p.depth << ',' << (p.exact ? to_string(*p.exact) : "") << ',' << p.ratio.lower().to_string()
       << ',' << p.ratio.upper().to_string() << '\n';
  }
  return os.str();
}

}  // namespace betadim
