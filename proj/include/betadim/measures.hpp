#pragma once

// Bernoulli measures carried by the constructions, local dimensions along
// cylinder checkpoints, and the closed-form dimension values.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "betadim/bary.hpp"
#include "betadim/beta_shift.hpp"
#include "betadim/constructions.hpp"
#include "betadim/numerics.hpp"

namespace betadim {

struct MeasureFactor {
  std::int64_t length = 0;  // j in #Sigma_{beta_N}^j
  Integer count;            // #Sigma_{beta_N}^j
  std::int64_t multiplicity = 0;
};

/// b-ary: mu = base^{-exponent}. beta case: mu = prod count^{-multiplicity}.
struct MeasureValue {
  std::int64_t depth = 0;
  std::int64_t exponent = 0;
  unsigned base = 0;  // b, #S, or 0 for the beta case
  std::vector<MeasureFactor> factors;

  /// Exact value; fine for small depths only.
  Rational exact() const;
  /// Natural logarithm of mu (<= 0), certified.
  Scalar log_mu(long bits = kDefaultPrecision) const;
};

/// mu(I_n) for the b-ary construction, uniform over `alphabet_size` digits at
/// every free position. DepthExceeded past the schedule.
MeasureValue measure_bary(const ScheduledRuns& s, unsigned alphabet_size, std::int64_t n);
MeasureValue measure_restricted(const ScheduledRuns& s, const DigitSet& S, std::int64_t n);

/// mu(I_n) for the beta layout: each free block contributes
/// 1/#Sigma_{beta_N}^{j} where j is the part of the block inside [1, n].
MeasureValue measure_beta(const ScheduledRuns& s, const BetaSystem& beta_N, std::int64_t n);

/// The product the beta-case closed form gives at h_k:
/// #Sigma^{n_1-1} prod_{j<k} (#Sigma^{delta_j})^{t_j} #Sigma^{l_{j+1}-u_j-1}.
MeasureValue measure_beta_closed_form(const ScheduledRuns& s, const BetaSystem& beta_N, std::size_t k);

/// Measure of the cylinder of a concrete prefix. NotInSupport if a fixed digit
/// differs from the layout or a free digit is outside the alphabet.
Rational measure_cylinder_bary(const ScheduledRuns& s, std::span<const Digit> alphabet, Digit marker,
                               std::span<const Digit> word);
/// Word-level beta measure: complete free blocks weigh 1/#Sigma^{len}, a cut
/// block weighs (#completions)/#Sigma^{len}. Consistent under refinement.
Rational measure_cylinder_beta(const ScheduledRuns& s, const BetaSystem& beta_N, std::span<const Digit> word);

/// (theta - 1 - theta vhat) / ((1 + theta vhat)(theta - 1)). vhat = 1 gives 0
/// for any theta; vhat = 0 gives 1. InfeasibleParameters below
/// theta = 1/(1 - vhat).
Rational dim_formula(const Rational& theta, const Rational& v_hat);
/// With a restricted digit set: times log #S / log b.
Scalar dim_formula(const Rational& theta, const Rational& v_hat, const DigitSet& S, long bits = kDefaultPrecision);

/// ((1 - vhat)/(1 + vhat))^2.
Rational dim_sup(const Rational& v_hat);
Rational theta_max(const Rational& v_hat);  // 2 / (1 - vhat)

struct ThetaMaximum {
  Rational theta0;
  Rational value;        // dim_formula at theta0
  Rational derivative;   // numerator of d/dtheta at theta0 (0 at a critical point)
  bool matches_sup = false;
  bool strict_max = false;  // value exceeds the formula at neighbouring rationals
};
/// Exact calculus on the rational function of theta.
ThetaMaximum verify_theta_maximum(const Rational& v_hat);

/// ((1 + eps)/(1 - eps)) dim_formula(theta, vhat).
Rational critical_exponent_s0(const Rational& theta, const Rational& v_hat, const Rational& eps);

/// Terms (2N)^{C log N} b^{N A} b^{-N B s} of the covering series with
/// A = (1+eps)(theta-1-theta vhat)/(theta-1), B = (1+theta vhat)(1-eps).
/// Slopes are d/dN of log T_N and of log of the partial sums, measured between
/// N_max/2 and N_max at s = s0 -+ delta.
struct SeriesProbe {
  double s0 = 0;
  double term_slope_below = 0;
  double term_slope_above = 0;
  double sum_slope_below = 0;
  double sum_slope_above = 0;
  bool sign_flip = false;
};
SeriesProbe probe_series(const Rational& theta, const Rational& v_hat, const Rational& eps, unsigned b = 2,
                         double C = 1.0, long n_max = 10000, double delta = 0.05);

/// dim_formula(theta, v/theta) along the grid, which equals
/// (1/(1+v))(1 - v/(theta-1)) and increases to 1/(1+v).
struct LimitReport {
  Rational v;
  Rational limit;
  std::vector<std::pair<Rational, Rational>> values;  // (theta, value)
  bool matches_rewrite = false;
  bool monotone = false;
  bool below_limit = false;
};
LimitReport limit_along_theta(const Rational& v, const std::vector<Rational>& theta_grid);

struct DimensionPoint {
  std::size_t k = 0;
  std::int64_t depth = 0;  // m_k (b-ary) or h_k (beta)
  std::optional<Rational> exact;
  Scalar ratio;            // log mu(I) / log |I|
};

struct DimensionReport {
  std::string params;
  Rational formula_value;  // dim_formula(theta, vhat)
  Scalar factor;           // 1, log #S/log b, or log beta_N/log beta
  Scalar limit;            // formula_value * factor
  std::vector<DimensionPoint> trajectory;
  std::optional<std::size_t> converged_at;
  Rational tolerance;
};

/// Ratios e(m_k) log(#alphabet) / (m_k log b) for k = 1..K; exact when the
/// alphabet is the full digit set.
DimensionReport local_dimension_bary(const ScheduledRuns& s, unsigned b, std::size_t K, const Rational& tol = Rational(1, 50));
DimensionReport local_dimension_restricted(const ScheduledRuns& s, const DigitSet& S, std::size_t K,
                                           const Rational& tol = Rational(1, 50));
/// -log mu(I_{h_k}) / (h_k log beta), using that I_{h_k} is full.
DimensionReport local_dimension_beta(const ScheduledRuns& s, const BetaSystem& beta, const BetaSystem& beta_N,
                                     std::size_t K, const Rational& tol = Rational(1, 50));

/// Step ratios (n_{k+1} - m_k)/(m_{k+1} - m_k) and cumulative ratios
/// sum_{j<k}(n_{j+1} - m_j)/m_k for k = 1..K.
struct StolzCesaro {
  std::vector<Rational> step;
  std::vector<Rational> cumulative;
};
StolzCesaro stolz_cesaro(const ScheduledRuns& s, std::size_t K);

std::string report_json(const DimensionReport& r);
std::string report_csv(const DimensionReport& r);

}  // namespace betadim
