// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "betadim/bary.hpp"
#include "betadim/beta_shift.hpp"
#include "betadim/constructions.hpp"
#include "betadim/measures.hpp"
#include "oracles.hpp"

using namespace betadim;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream notes;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) notes << what;
    else if (!cond) notes << "; " << what;
    ok = ok && cond;
  }
};

Rational q(const char* s) { return parse_rational(s); }
Rational canon(Rational x) {
  x.canonicalize();
  return x;
}

BetaSystem golden() { return BetaSystem::parse("root:1,1"); }
BetaSystem narayana() { return BetaSystem::parse("root:1,0,1"); }
BetaSystem tribonacci() { return BetaSystem::parse("root:1,1,1"); }

// |x - y| < 2^-bits for an enclosure x and an MPFR point y, at 400 bits.
bool close_to(const Scalar& x, const mpfr_t y, long bits) {
  mpfr_t lo, hi, tol;
  mpfr_inits2(400, lo, hi, tol, (mpfr_ptr)0);
  mpfr_set_q(lo, x.lower().to_rational().get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(hi, x.upper().to_rational().get_mpq_t(), MPFR_RNDU);
  mpfr_sub(lo, lo, y, MPFR_RNDD);
  mpfr_sub(hi, hi, y, MPFR_RNDU);
  mpfr_abs(lo, lo, MPFR_RNDU);
  mpfr_abs(hi, hi, MPFR_RNDU);
  mpfr_set_ui_2exp(tol, 1, -bits, MPFR_RNDN);
  const bool ok = mpfr_less_p(lo, tol) && mpfr_less_p(hi, tol);
  mpfr_clears(lo, hi, tol, (mpfr_ptr)0);
  return ok;
}

// Random word of length n accepted by `a`, drawing each digit among the
// accepted ones.
DigitWord random_word(const AdmissibilityAutomaton& a, std::size_t n, std::mt19937_64& rng) {
  DigitWord w;
  std::size_t state = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<Digit, std::size_t>> opts;
    for (unsigned d = 0; d <= a.alphabet_top; ++d)
      if (auto nx = a.step(state, static_cast<Digit>(d))) opts.emplace_back(static_cast<Digit>(d), *nx);
    const auto& [d, nx] = opts[rng() % opts.size()];
    w.push_back(d);
    state = nx;
  }
  return w;
}

struct Params {
  Rational theta, vh;
  unsigned b;
};
const std::vector<Params> kParams{{3, q("1/3"), 3}, {4, q("1/2"), 10}, {2, q("1/2"), 2}};

// ---------------------------------------------------------------- criteria

void formula_reproduction(Check& c) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 50; ++i) {
    const Rational vh(static_cast<long>(rng() % 19), 20);
    const Rational theta = canon(1 / (1 - vh) + Rational(static_cast<long>(rng() % 200) + 1, 13));
    const Rational want = canon((theta - 1 - theta * vh) / ((1 + theta * vh) * (theta - 1)));
    c.expect(dim_formula(theta, vh) == want, "grid point " + to_string(theta) + "," + to_string(vh));
  }
  for (int i = 0; i < 20; ++i) {
    const Rational vh(i, 21);
    const Rational t0 = canon(2 / (1 - vh));
    const Rational sup = canon(((1 - vh) / (1 + vh)) * ((1 - vh) / (1 + vh)));
    const ThetaMaximum m = verify_theta_maximum(vh);
    c.expect(m.theta0 == t0 && m.value == sup && m.matches_sup && m.derivative == 0, "sup at vhat " + to_string(vh));
    c.expect(dim_formula(t0, vh) == sup, "formula at theta0, vhat " + to_string(vh));
    // numerator of d/dtheta: (1 - vhat) D - N (2 vhat theta + 1 - vhat), N and D the fraction's parts
    const Rational Nt = t0 * (1 - vh) - 1, Dt = vh * t0 * t0 + (1 - vh) * t0 - 1;
    c.expect(canon((1 - vh) * Dt - Nt * (2 * vh * t0 + 1 - vh)) == 0, "derivative at theta0, vhat " + to_string(vh));
    if (vh > 0) {
      const Rational side = canon(t0 + Rational(1, 1000));
      c.expect(dim_formula(side, vh) < sup && dim_formula(canon(t0 - Rational(1, 1000)), vh) < sup,
               "strict maximum at vhat " + to_string(vh));
    }
  }
  c.expect(dim_formula(5, 0) == 1 && dim_formula(q("7/3"), 0) == 1, "vhat = 0");
  c.expect(dim_formula(5, 1) == 0 && dim_formula(q("7/3"), 1) == 0, "vhat = 1");
  for (const char* v : {"1/3", "1/2", "3/7", "9/10"}) {
    const Rational vh = q(v);
    c.expect(dim_formula(canon(1 / (1 - vh)), vh) == 0, std::string("theta = 1/(1-vhat) at ") + v);
  }
}

void local_dimension_bary_criterion(Check& c) {
  for (const auto& p : kParams) {
    const ScheduledRuns s = schedule(p.theta, p.vh, 15, p.b == 2 ? 2 : 1);
    const Rational f = canon((p.theta - 1 - p.theta * p.vh) / ((1 + p.theta * p.vh) * (p.theta - 1)));
    const DimensionReport rep = local_dimension_bary(s, p.b, 15);
    const Rational r15 = *rep.trajectory.at(14).exact;
    // free positions up to m_15: n_1 - 1, then per stage the gap minus markers
    // (a gap is empty when n_{k+1} = m_k shares the marker)
    std::int64_t free = s.n[0] - 1;
    for (std::size_t k = 1; k < 15; ++k)
      free += std::max<std::int64_t>(0, s.n[k] - s.m[k - 1] - 1 - s.t[k - 1] * s.marker_width);
    const Rational oracle = canon(Rational(free) / Rational(s.m[14]));
    c.expect(r15 == oracle, "e(m_15) differs from the stage count for theta=" + to_string(p.theta));
    c.expect(std::abs(Rational(r15 - f).get_d()) < 0.02, "ratio at k=15 for theta=" + to_string(p.theta));
    const Rational step = canon(Rational(s.n[15] - s.m[14]) / Rational(s.m[15] - s.m[14]));
    c.expect(std::abs(Rational(step - f).get_d()) < 0.005, "Stolz-Cesaro step for theta=" + to_string(p.theta));
    c.expect(stolz_cesaro(s, 15).step.at(14) == step, "library step for theta=" + to_string(p.theta));
  }
}

void exponent_round_trip(Check& c) {
  for (const auto& p : kParams) {
    ConstructionSpec spec{p.theta, p.vh, FillPolicy::random(7), 12, {}};
    const GeneratedWord g = generate_bary(spec, p.b);
    RunOptions ro;
    ro.records_only = true;
    const ExponentEstimate e = estimate_exponents(run_decomposition(g.digits, p.b, ro));
    const double v = e.v_lower.get_d(), vh = e.v_hat_lower.get_d();
    const double tv = Rational(p.theta * p.vh).get_d(), tvh = p.vh.get_d();
    c.expect(std::abs(v - tv) <= 0.03 && std::abs(vh - tvh) <= 0.03,
             "construction theta=" + to_string(p.theta) + ": v=" + std::to_string(v) + " vhat=" + std::to_string(vh));
  }
  const DigitWord lac = expand_lacunary(10, LacunaryRule::power(1), 1 << 16);
  // independent check of the digits: ones exactly at positions 2^j
  bool digits_ok = true;
  for (std::size_t i = 1; i <= lac.size(); ++i) digits_ok = digits_ok && (lac[i - 1] == ((i & (i - 1)) == 0 && i >= 2));
  c.expect(digits_ok, "lacunary digits");
  const ExponentEstimate e = estimate_exponents(run_decomposition(lac, 10));
  const double v = e.v_lower.get_d(), vh = e.v_hat_lower.get_d();
  c.expect(v >= 0.95 && v <= 1.05 && vh >= 0.45 && vh <= 0.55, "lacunary v=" + std::to_string(v) + " vhat=" + std::to_string(vh));
}

void beta_oracles(Check& c) {
  for (const auto& beta : {golden(), narayana(), tribonacci(), BetaSystem::integer(3)}) {
    const DigitWord bound = expansion_of_one_star(beta, 16);
    for (std::size_t n = 1; n <= 10; ++n) {
      long mismatches = 0, brute = 0;
      oracle::for_each_word(n, beta.alphabet_top(), [&](const DigitWord& w) {
        const bool lex = oracle::admissible_by_shifts(w, bound);
        brute += lex;
        mismatches += is_admissible(beta, w) != lex;
      });
      c.expect(mismatches == 0, beta.label() + " admissibility at n=" + std::to_string(n));
      c.expect(count_admissible(beta, n).count == brute, beta.label() + " count at n=" + std::to_string(n));
    }
    // Renyi: beta^n <= count <= beta^{n+1}/(beta-1), decided in interval arithmetic
    const Scalar b = beta.value(256);
    for (std::size_t n = 1; n <= 20; ++n) {
      const Integer cnt = count_admissible(beta, n).count;
      const Scalar cs = Scalar::from_rational(Rational(cnt), 256);
      const Scalar lo = b.pow(n), hi = b.pow(n + 1) / (b - Scalar::from_integer(1));
      bool lower = false;
      if (beta.is_integer()) {
        Integer p3;
        mpz_ui_pow_ui(p3.get_mpz_t(), 3, n);
        lower = cnt == p3;
      } else {
        lower = certified_less(lo, cs).value_or(false);
      }
      const bool upper = certified_less(cs, hi).value_or(false);
      c.expect(lower && upper, beta.label() + " Renyi at n=" + std::to_string(n));
    }
  }
  Integer a = 1, b = 2;
  for (std::size_t n = 1; n <= 20; ++n) {
    c.expect(count_admissible(golden(), n).count == b, "golden Fibonacci at n=" + std::to_string(n));
    const Integer t = a + b;
    a = b;
    b = t;
  }
}

void cylinder_laws(Check& c) {
  std::mt19937_64 rng(99);
  const std::vector<BetaSystem> bases{golden(), narayana(), tribonacci()};
  int pairs = 0, tries = 0;
  while (pairs < 1000 && tries < 100000) {
    ++tries;
    const BetaSystem& beta = bases[rng() % bases.size()];
    const std::size_t n = 1 + rng() % 6, m = 1 + rng() % (12 - n);
    const DigitWord w = random_word(beta.automaton(), n, rng);
    if (!is_full(beta, w)) continue;
    const DigitWord w2 = random_word(beta.automaton(), m, rng);
    DigitWord ww = w;
    ww.insert(ww.end(), w2.begin(), w2.end());
    const CylinderInterval a = cylinder(beta, w), b = cylinder(beta, w2), ab = cylinder(beta, ww);
    const Polynomial prod = beta.reduce(a.length_element * b.length_element);
    const bool exact = beta.sign(ab.length_element - prod) == 0 && beta.sign(a.length_element - beta.power(-static_cast<long>(n))) == 0;
    const Scalar diff = ab.length - a.length * b.length;
    c.expect(exact && diff.contains(Rational(0)), "product identity for " + format_word(ww, ""));
    ++pairs;
  }
  c.expect(pairs == 1000, "only " + std::to_string(pairs) + " full pairs drawn");

  int words = 0;
  // eps*(z^3 = z^2 + 1) starts 1 0 0, so its beta_3 is degenerate; golden and tribonacci cover N = 3, 6
  for (const auto& beta : {golden(), tribonacci()}) {
    for (std::size_t N : {3u, 6u}) {
      const BetaSystem bN = beta_N(beta, N);
      for (int i = 0; i < 250; ++i, ++words) {
        const std::size_t n = 1 + rng() % 12;
        const DigitWord w = random_word(bN.automaton(), n, rng);
        if (!is_admissible(beta, w)) {
          c.expect(false, "beta_N word not admissible in beta");
          continue;
        }
        const CylinderInterval cy = cylinder(beta, w);
        const long nl = static_cast<long>(n), Nl = static_cast<long>(N);
        const bool upper = beta.sign(cy.length_element - beta.power(-nl)) <= 0;
        const bool lower = beta.sign(cy.length_element - beta.power(-(nl + Nl))) >= 0;
        c.expect(upper && lower, beta.label() + " N=" + std::to_string(N) + " bounds for " + format_word(w, ""));
      }
    }
  }
  c.expect(words == 1000, "lower-bound sample short");

  for (const auto& beta : {golden(), narayana(), tribonacci(), BetaSystem::integer(3)}) {
    for (std::size_t n = 1; n <= 10; ++n) {
      Scalar total = Scalar::from_integer(0);
      oracle::for_each_word(n, beta.alphabet_top(), [&](const DigitWord& w) {
        if (is_admissible(beta, w)) total = total + cylinder(beta, w).length;
      });
      const Scalar gap = total - Scalar::from_integer(1);
      const Scalar tol = Scalar::from_rational(Rational(1) / Rational(Integer(1) << 64));
      const bool ok = certified_less(gap, tol).value_or(false) && certified_less(-tol, gap).value_or(false);
      c.expect(ok, beta.label() + " lengths at n=" + std::to_string(n));
    }
  }
}

void parry_round_trip(Check& c) {
  const std::vector<std::pair<BetaSystem, std::vector<int>>> battery{
      {golden(), {1, 1}}, {narayana(), {1, 0, 1}}, {tribonacci(), {1, 1, 1}}};
  for (const auto& [beta, coeffs] : battery) {
    mpfr_t ref;
    mpfr_init2(ref, 400);
    oracle::bisect_root(ref, coeffs, 360);
    const auto m = beta.simple_parry_length();
    c.expect(m.has_value(), beta.label() + " is simple Parry");
    if (m) {
      const DigitWord d = greedy_expand(beta, Rational(1), *m + 4);
      c.expect(std::all_of(d.begin() + static_cast<long>(*m), d.end(), [](Digit x) { return x == 0; }), "zero tail");
      const Scalar back = parry_invert(InfiniteWord::finite(DigitWord(d.begin(), d.begin() + static_cast<long>(*m))), 256).value(256);
      c.expect(close_to(back, ref, 100), beta.label() + " round trip");
    }
    mpfr_clear(ref);
  }
  mpfr_t phi;
  mpfr_init2(phi, 400);
  mpfr_sqrt_ui(phi, 5, MPFR_RNDN);
  mpfr_add_ui(phi, phi, 1, MPFR_RNDN);
  mpfr_div_2ui(phi, phi, 1, MPFR_RNDN);
  for (const char* w : {"(10)", "11"})
    c.expect(close_to(parry_invert(parse_infinite_word(w), 256).value(256), phi, 100), std::string(w) + " to golden");
  mpfr_clear(phi);
}

void parameter_space(Check& c) {
  const BetaSystem b0 = BetaSystem::parse("rat:3/2"), b1 = golden(), b2 = tribonacci();
  mpfr_t phi, x;
  mpfr_inits2(400, phi, x, (mpfr_ptr)0);
  mpfr_sqrt_ui(phi, 5, MPFR_RNDN);
  mpfr_add_ui(phi, phi, 1, MPFR_RNDN);
  mpfr_div_2ui(phi, phi, 1, MPFR_RNDN);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ConstructionSpec spec{3, q("1/3"), FillPolicy::random(seed), 2, {}};
    const ParameterSpaceResult r = generate_parameter_space(b0, b1, b2, 5, spec);
    const Scalar beta = r.beta.value(256);
    mpfr_set_q(x, beta.upper().to_rational().get_mpq_t(), MPFR_RNDU);
    const bool below = mpfr_less_p(x, phi);
    const bool above = beta.lower().to_rational() > Rational(3, 2);
    c.expect(r.self_admissible && oracle::admissible_by_shifts(r.word, r.word), "seed " + std::to_string(seed) + " self-admissible");
    c.expect(r.certified() && below && above, "seed " + std::to_string(seed) + " sandwich");
  }
  mpfr_clears(phi, x, (mpfr_ptr)0);
}

void restricted_scaling(Check& c) {
  const DigitSet S = DigitSet::make(3, {0, 2});
  for (const auto& p : kParams) {
    const ScheduledRuns s = schedule(p.theta, p.vh, 15);
    const DimensionReport rep = local_dimension_restricted(s, S, 15);
    const double target = std::log(2.0) / std::log(3.0) * Rational(p.theta - 1 - p.theta * p.vh).get_d() /
                          Rational((1 + p.theta * p.vh) * (p.theta - 1)).get_d();
    const double got = rep.trajectory.at(14).ratio.midpoint();
    c.expect(std::abs(got - target) < 0.02, "theta=" + to_string(p.theta) + ": " + std::to_string(got) + " vs " +
                                                std::to_string(target));
  }
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<void(Check&)> run;
  };
  const std::vector<Criterion> criteria{
      {"formula reproduction", 1, formula_reproduction},
      {"local-dimension convergence (b-ary)", 10, local_dimension_bary_criterion},
      {"exponent round trip", 5, exponent_round_trip},
      {"beta-machinery oracle equivalence", 30, beta_oracles},
      {"cylinder laws", 60, cylinder_laws},
      {"Parry round trip", 5, parry_round_trip},
      {"parameter-space sandwich", 30, parameter_space},
      {"restricted-digit scaling", 10, restricted_scaling},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs < criteria[i].budget_s, "runtime " + std::to_string(secs) + " s over budget");
    std::printf("%s %zu %s (%.2f s)%s%s\n", c.ok ? "PASS" : "FAIL", i + 1, criteria[i].name, secs, c.ok ? "" : ": ",
                c.notes.str().c_str());
    failed += !c.ok;
  }
  return failed == 0 ? 0 : 1;
}
