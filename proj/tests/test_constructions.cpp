#include <cmath>
#include <random>

#include "betadim/bary.hpp"
#include "betadim/constructions.hpp"
#include "betadim/error.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace betadim;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

Rational q(const char* s) { return parse_rational(s); }

BetaSystem golden() { return BetaSystem::parse("root:1,1"); }

// The schedule straight from its definition, with doubles only for the
// powers (exact for the small integer thetas used here).
struct NaiveSchedule {
  std::vector<std::int64_t> n, m, t;
};
NaiveSchedule naive_schedule(long theta_num, long theta_den, long vh_num, long vh_den, int K, int width) {
  NaiveSchedule s;
  std::int64_t pn = 1, pd = 1;
  for (int k = 1; k <= K + 1; ++k) {
    pn *= theta_num;
    pd *= theta_den;
    const std::int64_t np = pn / pd;
    // floor((theta vhat + 1) np)
    const std::int64_t mp = (theta_num * vh_num + theta_den * vh_den) * np / (theta_den * vh_den);
    std::int64_t n = np, span = mp - np;
    if (!s.n.empty()) {
      n = std::max(n, s.m.back());
      span = std::max(span, s.m.back() - s.n.back());
    }
    span = std::max<std::int64_t>(span, 2);
    s.n.push_back(n);
    s.m.push_back(n + span);
  }
  for (int k = 0; k < K; ++k) {
    std::int64_t t = 0;
    while (s.m[k] + (t + 1) * (s.m[k] - s.n[k]) + width - 1 < s.n[k + 1]) ++t;
    s.t.push_back(t);
  }
  return s;
}

std::size_t longest_run_in(const DigitWord& w, Digit d, std::size_t from, std::size_t to) {
  std::size_t best = 0;
  for (auto [a, b] : oracle::runs_of(w, d)) {
    if (a < from || b >= to) continue;
    best = std::max(best, b - a + 1);
  }
  return best;
}

}  // namespace

TEST_CASE("schedule examples") {
  auto s = schedule(3, q("1/3"), 8);
  for (std::size_t k = 1; k <= 8; ++k) {
    CHECK(s.n[k - 1] == static_cast<std::int64_t>(std::pow(3, k)));
    CHECK(s.m[k - 1] == 2 * s.n[k - 1]);
    CHECK(s.t[k - 1] == 0);
  }
  auto b = schedule(2, q("1/2"), 6);
  for (std::size_t k = 1; k <= 6; ++k) {
    CHECK(b.m[k - 1] == b.n[k]);
    CHECK(b.t[k - 1] == 0);
  }
  CHECK(code_of([] { schedule(q("6/5"), q("1/2"), 4); }) == ErrorCode::InfeasibleParameters);
  CHECK(code_of([] { schedule(3, 0, 4); }) == ErrorCode::InfeasibleParameters);
  CHECK(code_of([] { schedule(3, 1, 4); }) == ErrorCode::InfeasibleParameters);
  CHECK(code_of([] { schedule(2, q("1/2"), 80); }) == ErrorCode::DepthExceeded);
}

TEST_CASE("schedule agrees with the naive definition") {
  struct P {
    long tn, td, vn, vd;
  };
  for (P p : {P{3, 1, 1, 3}, P{4, 1, 1, 2}, P{5, 1, 1, 5}, P{7, 2, 1, 4}, P{10, 1, 1, 10}, P{5, 2, 1, 3}}) {
    for (int width : {1, 2}) {
      const int K = 10;
      auto s = schedule(Rational(p.tn, p.td), Rational(p.vn, p.vd), K, width);
      auto o = naive_schedule(p.tn, p.td, p.vn, p.vd, K, width);
      CAPTURE(p.tn);
      CAPTURE(p.vd);
      for (int k = 0; k < K; ++k) {
        CHECK(s.n[k] == o.n[k]);
        CHECK(s.m[k] == o.m[k]);
        CHECK(s.t[k] == o.t[k]);
      }
      CHECK(s.n[K] == o.n[K]);
    }
  }
}

TEST_CASE("schedule invariants on random parameters") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const long vd = 2 + static_cast<long>(rng() % 9);
    const long vn = 1 + static_cast<long>(rng() % (vd - 1));
    const Rational vh(vn, vd);
    // theta in [1/(1-vh), 1/(1-vh) + 6]
    const Rational theta = Rational(vd, vd - vn) + Rational(static_cast<long>(rng() % 60), 10);
    auto s = schedule(theta, vh, 12);
    CAPTURE(to_string(theta));
    CAPTURE(to_string(vh));
    for (std::size_t k = 0; k < 12; ++k) {
      CHECK(s.n[k] < s.m[k]);
      CHECK(s.m[k] <= s.n[k + 1]);
      if (k > 0) CHECK(s.span(k + 1) >= s.span(k));
      // t_k is the largest t with m_k + t span < n_{k+1}
      if (s.m[k] < s.n[k + 1]) {
        CHECK(s.m[k] + s.t[k] * s.span(k + 1) < s.n[k + 1]);
        CHECK(s.m[k] + (s.t[k] + 1) * s.span(k + 1) >= s.n[k + 1]);
      }
      if (k >= 6) CHECK(Rational(s.t[k]) <= 2 / vh + 1);
    }
  }
}

TEST_CASE("schedule limits approach theta*vhat and vhat") {
  struct P {
    Rational theta, vh;
  };
  for (const P& p : {P{3, q("1/3")}, P{4, q("1/2")}, P{5, q("1/5")}, P{q("7/2"), q("1/4")}}) {
    const std::size_t K = 18;
    auto s = schedule(p.theta, p.vh, K);
    const double tv = Rational(p.theta * p.vh).get_d(), v = p.vh.get_d();
    double prev = INFINITY;
    for (std::size_t k = 4; k <= K; ++k) {
      const double span = static_cast<double>(s.span(k));
      const double e1 = std::abs(span / s.n[k - 1] - tv);
      const double e2 = std::abs(span / s.n[k] - v);
      CHECK(e1 < 10.0 / s.n[k - 1]);
      CHECK(e2 < 10.0 / s.n[k - 1]);
      CHECK(e1 <= std::max(prev, 10.0 / s.n[k - 1]));
      prev = e1;
    }
  }
}

TEST_CASE("generate_bary small example") {
  ConstructionSpec spec{3, q("1/3"), FillPolicy::constant_digit(1), 1, 9};
  auto g = generate_bary(spec, 3);
  REQUIRE(g.digits.size() == 9);
  CHECK(g.digits == DigitWord{1, 1, 1, 0, 0, 1, 1, 1, 1});
  CHECK(g.fixed == std::vector<std::uint8_t>{0, 0, 1, 1, 1, 1, 0, 0, 1});
  CHECK(g.clamps.count == 0);
  CHECK_FALSE(g.last_stage_complete);

  ConstructionSpec whole{3, q("1/3"), FillPolicy::constant_digit(1), 2, {}};
  auto w = generate_bary(whole, 3);
  CHECK(w.digits.size() == 26);
  CHECK(w.last_stage_complete);
}

TEST_CASE("b = 2 uses 10 blocks as markers") {
  ConstructionSpec spec{5, q("1/5"), FillPolicy::constant_digit(1), 3, {}};
  auto g = generate_bary(spec, 2);
  const auto& s = g.schedule;
  CHECK(s.marker_width == 2);
  for (std::size_t k = 1; k <= 3; ++k) {
    REQUIRE(s.t[k - 1] > 0);
    for (std::int64_t t = 1; t <= s.t[k - 1]; ++t) {
      const std::int64_t p = s.m[k - 1] + t * s.span(k);
      CHECK(g.digits[p - 1] == 1);
      CHECK(g.digits[p] == 0);
      CHECK(g.fixed[p] == 1);
    }
  }
  // a ones-only fill would make runs of 1 = b-1 unbounded; the clamp breaks them
  const std::size_t L = g.digits.size();
  for (std::size_t k = 1; k <= 3; ++k) {
    const auto end = static_cast<std::size_t>(std::min<std::int64_t>(s.n[k], static_cast<std::int64_t>(L + 1)) - 1);
    CHECK(longest_run_in(g.digits, 1, 0, end) <= static_cast<std::size_t>(s.span(k) - 1));
  }
}

TEST_CASE("constant zero fill is clamped and logged") {
  ConstructionSpec spec{3, q("1/3"), FillPolicy::constant_digit(0), 5, {}};
  auto g = generate_bary(spec, 3);
  CHECK(g.clamps.count > 0);
  CHECK(g.clamps.unresolved == 0);
  CHECK_FALSE(g.clamps.first.empty());
  CHECK(g.clamps.first.front().proposed == 0);
  CHECK(g.clamps.first.front().used != 0);
  CHECK(code_of([] { generate_bary({3, q("1/3"), FillPolicy::constant_digit(5), 2, {}}, 3); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("longest run in the prefix n_{k+1} equals m_k - n_k - 1") {
  struct P {
    Rational theta, vh;
    unsigned b;
  };
  for (const P& p : {P{3, q("1/3"), 3}, P{4, q("1/2"), 10}, P{5, q("1/5"), 2}, P{q("7/2"), q("1/4"), 4},
                     P{5, q("1/5"), 3}}) {
    for (auto fill : {FillPolicy::random(1), FillPolicy::random(99), FillPolicy::constant_digit(0),
                      FillPolicy::constant_digit(static_cast<Digit>(p.b - 1))}) {
      ConstructionSpec spec{p.theta, p.vh, fill, 7, {}};
      auto g = generate_bary(spec, p.b);
      const auto& s = g.schedule;
      CAPTURE(p.b);
      CAPTURE(fill.describe());
      CHECK(g.clamps.unresolved == 0);
      for (std::size_t k = 1; k <= 7; ++k) {
        const auto end = static_cast<std::size_t>(s.n[k] - 1);
        const auto delta = static_cast<std::size_t>(s.span(k) - 1);
        CHECK(oracle::longest_run(g.digits, 0, end) == delta);
        CHECK(longest_run_in(g.digits, static_cast<Digit>(p.b - 1), 1, end) <= std::max<std::size_t>(delta - 1, 1));
      }
    }
  }
}

TEST_CASE("stream fill is used verbatim on free positions") {
  ConstructionSpec spec{4, q("1/2"), FillPolicy::from_stream([](std::int64_t p) { return static_cast<Digit>(2 + p % 5); }), 4,
                        {}};
  auto g = generate_bary(spec, 10);
  CHECK(g.clamps.count == 0);
  for (std::size_t i = 0; i < g.digits.size(); ++i)
    if (!g.fixed[i]) CHECK(g.digits[i] == 2 + (i + 1) % 5);
}

TEST_CASE("random fill is deterministic in the seed") {
  ConstructionSpec a{3, q("1/3"), FillPolicy::random(5), 6, {}};
  ConstructionSpec b = a;
  b.fill = FillPolicy::random(6);
  CHECK(generate_bary(a, 3).digits == generate_bary(a, 3).digits);
  CHECK(generate_bary(a, 3).digits != generate_bary(b, 3).digits);
}

TEST_CASE("free_positions counts non-prescribed positions") {
  for (unsigned b : {2u, 3u, 7u}) {
    for (const auto& [theta, vh] : std::vector<std::pair<Rational, Rational>>{{3, q("1/3")}, {5, q("1/5")}, {q("9/2"), q("1/3")}}) {
      ConstructionSpec spec{theta, vh, FillPolicy::random(3), 6, {}};
      auto g = generate_bary(spec, b);
      std::int64_t free = 0;
      for (std::size_t i = 0; i < g.digits.size(); ++i) {
        free += g.fixed[i] ? 0 : 1;
        CHECK(free_positions(g.schedule, static_cast<std::int64_t>(i + 1)) == free);
      }
    }
  }
}

TEST_CASE("restricted digit sets") {
  auto S = DigitSet::make(3, {0, 2});
  CHECK(marker_digit(S) == 2);
  CHECK(marker_digit(DigitSet::make(5, {0, 1, 3})) == 1);
  ConstructionSpec spec{3, q("1/3"), FillPolicy::random(11), 6, {}};
  auto g = generate_restricted(spec, S);
  for (Digit d : g.digits) CHECK(S.contains(d));
  const auto& s = g.schedule;
  for (std::size_t k = 1; k <= 6; ++k) {
    CHECK(g.digits[s.n[k - 1] - 1] == 2);
    CHECK(g.digits[s.m[k - 1] - 1] == 2);
    CHECK(oracle::longest_run(g.digits, 0, static_cast<std::size_t>(s.n[k] - 1)) == static_cast<std::size_t>(s.span(k) - 1));
  }
  for (const auto& e : g.clamps.first)
    if (e.reason.rfind("no digit", 0) == 0) CHECK(e.position < s.n[2]);
  CHECK(code_of([] { DigitSet::make(5, {1, 3}); }) == ErrorCode::InvalidDigitSet);

  auto full = DigitSet::make(3, {0, 1, 2});
  CHECK(generate_restricted(spec, full).digits == generate_bary(spec, 3).digits);
}

TEST_CASE("beta layout indices match a digit-by-digit walk") {
  for (std::size_t N : {1u, 3u, 6u}) {
    for (const auto& [theta, vh] : std::vector<std::pair<Rational, Rational>>{{3, q("1/3")}, {5, q("1/5")}, {q("9/2"), q("1/3")}}) {
      auto s = with_beta_layout(schedule(theta, vh, 6), N);
      // every b-ary marker position p becomes a block of 2N+1 digits
      std::vector<std::int64_t> markers;
      for (std::size_t k = 0; k < s.n.size(); ++k) {
        markers.push_back(s.n[k]);
        markers.push_back(s.m[k]);
        for (std::int64_t t = 1; t <= s.t[k]; ++t) markers.push_back(s.m[k] + t * s.span(k + 1));
      }
      std::sort(markers.begin(), markers.end());
      auto block_start = [&](std::int64_t p) {
        const auto before = std::lower_bound(markers.begin(), markers.end(), p) - markers.begin();
        return p + 2 * static_cast<std::int64_t>(N) * before;
      };
      const auto n2 = 2 * static_cast<std::int64_t>(N);
      for (std::size_t k = 1; k <= 6; ++k) {
        CHECK(s.l[k - 1] == block_start(s.n[k - 1]));
        CHECK(s.h[k - 1] == block_start(s.m[k - 1]) + n2);
        CHECK(s.delta[k - 1] == s.span(k) - 1);
        CHECK(s.u[k - 1] == block_start(s.m[k - 1] + s.t[k - 1] * s.span(k)) + n2);
      }
    }
  }
  CHECK(code_of([] { with_beta_layout(schedule(2, q("1/2"), 4), 3); }) == ErrorCode::InfeasibleParameters);
}

TEST_CASE("beta construction: golden, N = 3") {
  ConstructionSpec spec{3, q("1/3"), FillPolicy::random(4), 4, {}};
  auto bc = generate_beta(spec, golden(), 3);
  const auto& w = bc.word.digits;
  const auto& s = bc.word.schedule;
  CHECK(is_admissible(bc.beta_N, w));
  CHECK(is_admissible(golden(), w));
  // zeros between the 1 of the l_1 block and the 1 of the h_1 block
  const std::int64_t one_a = s.l[0] + 3, one_b = s.h[0] - 3;
  CHECK(w[one_a - 1] == 1);
  CHECK(w[one_b - 1] == 1);
  for (std::int64_t p = one_a + 1; p < one_b; ++p) CHECK(w[p - 1] == 0);
  CHECK(one_b - one_a - 1 == s.delta[0] + 6);
  // no free block builds a zero run as long as the constructed one
  for (std::size_t k = 1; k < 4; ++k) {
    const auto end = static_cast<std::size_t>(s.l[k] - 1);
    CHECK(oracle::longest_run(w, 0, end) == static_cast<std::size_t>(s.delta[k - 1] + 6));
  }
}

TEST_CASE("beta construction admissibility over bases, fills and N") {
  for (const char* b : {"root:1,1", "root:1,0,1", "root:1,1,1", "int:3", "root:2,1"}) {
    for (std::size_t N : {2u, 3u, 6u}) {
      for (auto fill : {FillPolicy::random(1), FillPolicy::random(2), FillPolicy::constant_digit(0),
                        FillPolicy::constant_digit(1), FillPolicy::constant_digit(2)}) {
        const BetaSystem beta = BetaSystem::parse(b);
        // 1 0 ... 0 as the first N digits of eps* gives no approximant
        if (expansion_of_one_star(beta, N) == [&] {
              DigitWord d(N, 0);
              d[0] = 1;
              return d;
            }())
          continue;
        ConstructionSpec spec{5, q("1/5"), fill, 3, {}};
        CAPTURE(std::string(b));
        CAPTURE(N);
        CAPTURE(fill.describe());
        auto bc = generate_beta(spec, beta, N);
        CHECK(is_admissible(bc.beta_N, bc.word.digits));
        CHECK(is_admissible(beta, bc.word.digits));
        const auto& s = bc.word.schedule;
        const auto& w = bc.word.digits;
        const auto n2 = 2 * static_cast<std::int64_t>(N);
        for (std::size_t k = 1; k < 3; ++k) {
          const auto end = static_cast<std::size_t>(s.l[k] - 1);
          CHECK(oracle::longest_run(w, 0, end) == static_cast<std::size_t>(s.delta[k - 1] + n2));
        }
      }
    }
  }
}

TEST_CASE("beta construction with a raw digit count") {
  ConstructionSpec spec{3, q("1/3"), FillPolicy::random(4), 1, 200};
  auto bc = generate_beta(spec, golden(), 3);
  CHECK(bc.word.digits.size() == 200);
  CHECK_FALSE(bc.word.last_stage_complete);
  CHECK(is_admissible(bc.beta_N, bc.word.digits));
}

TEST_CASE("free blocks tile the non-prescribed positions") {
  auto s = with_beta_layout(schedule(5, q("1/5"), 4), 2);
  auto blocks = beta_free_blocks(s);
  std::vector<int> cover(static_cast<std::size_t>(s.length()), 0);
  for (const auto& fb : blocks)
    for (std::int64_t j = 0; j < fb.length; ++j) ++cover[fb.start - 1 + j];
  std::int64_t prescribed = 0;
  for (int c : cover) {
    CHECK(c <= 1);
    prescribed += c == 0;
  }
  // each stage: two marker blocks, the core zeros, t_k extra marker blocks
  std::int64_t expect = 0;
  for (std::size_t k = 0; k < 4; ++k) expect += s.h[k] - s.l[k] + 1 + s.t[k] * 5;
  CHECK(prescribed == expect);
}

TEST_CASE("parameter space: 3/2 < beta < golden with tribonacci") {
  const BetaSystem b0 = BetaSystem::parse("rat:3/2"), b1 = golden(), b2 = BetaSystem::parse("root:1,1,1");
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ConstructionSpec spec{3, q("1/3"), FillPolicy::random(seed), 2, {}};
    auto r = generate_parameter_space(b0, b1, b2, 5, spec);
    CAPTURE(seed);
    CHECK(r.self_admissible);
    CHECK(oracle::admissible_by_shifts(r.word, r.word));
    CHECK(r.lex_below_beta1);
    CHECK(r.admissible_beta2);
    CHECK(r.certified());
    CHECK(DigitWord(r.word.begin(), r.word.begin() + 5) == expansion_of_one_star(b1, 5));
    for (std::size_t i = 5; i < 10; ++i) CHECK(r.word[i] == 0);
  }
}

TEST_CASE("parameter space gates and the zero tail") {
  const BetaSystem b0 = BetaSystem::parse("rat:3/2"), b1 = golden(), b2 = BetaSystem::parse("root:1,1,1");
  ConstructionSpec spec{3, q("1/3"), FillPolicy::random(1), 2, {}};
  // eps*(golden) = 101010..., eps*_2 = 0
  CHECK(code_of([&] { generate_parameter_space(b0, b1, b2, 2, spec); }) == ErrorCode::PrefixConditionFailed);
  // d_{3/2}(1) = 1 0 1 0 0 0 0 0 0 1 ... ties with 1 0 1 at N = 3
  CHECK(code_of([&] { generate_parameter_space(b0, b1, b2, 3, spec); }) == ErrorCode::PrefixConditionFailed);
  CHECK(code_of([&] { generate_parameter_space(b1, b0, b2, 5, spec); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { generate_parameter_space(b0, b1, BetaSystem::parse("rat:5/2"), 5, spec); }) ==
        ErrorCode::InvalidArgument);

  auto r = generate_parameter_space(b0, b1, b2, 5, spec, DigitWord(30, 0));
  CHECK(r.certified());
  // the root of 1 = sum eps*_i z^{-i}, i <= 5: the trailing zeros do not move it
  const auto tilde = r.beta_tilde.value(128);
  const auto got = r.beta.value(128);
  CHECK(certified_less(tilde, got) == std::nullopt);
  CHECK(std::abs(tilde.midpoint() - got.midpoint()) < 1e-30);
  CHECK(certified_less(got, b1.value()) == true);
}

TEST_CASE("exponents of constructed words") {
  struct P {
    Rational theta, vh;
    unsigned b;
    std::size_t stages;
  };
  for (const P& p : {P{3, q("1/3"), 3, 10}, P{4, q("1/2"), 10, 8}, P{2, q("1/2"), 2, 14}, P{5, q("1/5"), 2, 7}}) {
    ConstructionSpec spec{p.theta, p.vh, FillPolicy::random(21), p.stages, {}};
    auto g = generate_bary(spec, p.b);
    auto est = estimate_from_digits(g.digits, p.b);
    CAPTURE(p.b);
    REQUIRE_FALSE(est.degenerate);
    CHECK(std::abs(Rational(est.v_lower - p.theta * p.vh).get_d()) < 0.03);
    CHECK(std::abs(Rational(est.v_hat_lower - p.vh).get_d()) < 0.03);
  }
}

TEST_CASE("zero-run exponents of a beta construction") {
  ConstructionSpec spec{3, q("1/3"), FillPolicy::random(8), 1, 10000};
  auto bc = generate_beta(spec, golden(), 3);
  auto est = estimate_from_digits(bc.word.digits, 2, {.records_only = false, .zeros_only = true});
  REQUIRE_FALSE(est.degenerate);
  CHECK(std::abs(est.v_lower.get_d() - 1.0) < 0.05);
  CHECK(std::abs(est.v_hat_lower.get_d() - 1.0 / 3) < 0.05);
}
