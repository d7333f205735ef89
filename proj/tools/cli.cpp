#include "cli.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "betadim/bary.hpp"
#include "betadim/beta_shift.hpp"
#include "betadim/constructions.hpp"
#include "betadim/error.hpp"
#include "betadim/measures.hpp"
#include "betadim/numerics.hpp"
#include "json.hpp"

#ifndef BETADIM_VERSION
#define BETADIM_VERSION "0.0.0"
#endif

namespace betadim::cli {

const char* version() { return BETADIM_VERSION; }

namespace {

using J = nlohmann::ordered_json;

struct Options {
  // shared
  std::string format = "text";
  std::string output;
  long precision = default_precision();
  std::uint64_t seed = 1;
  // bases and words
  std::string beta, beta0, beta1, beta2;
  unsigned base = 10;
  std::string set;
  std::string word;
  std::string input;
  std::size_t N = 3;
  // sizes
  std::size_t len = 0;
  std::size_t digits = 0;
  std::size_t stages = 6;
  std::int64_t depth = 0;
  std::size_t limit = 1000;
  std::optional<std::size_t> window;
  // expansions
  std::string rational;
  std::string x;
  std::string lacunary;
  bool finite = false;
  bool records = false;
  bool zeros_only = false;
  // constructions and dimensions
  std::string theta, vhat, eps = "0";
  std::string fill = "random";
  std::optional<std::int64_t> raw_digits;
  std::string tol = "1/50";
  bool probe = false;
  bool sup = false;
};

struct Output {
  J result = J::object();
  std::string text;
  std::string csv;
  std::optional<DigitFile> digits;
  std::optional<J> sidecar;
};

J config_json(const std::string& command, const Options& o, const std::vector<std::string>& args) {
  J c;
  c["command"] = command;
  c["args"] = args;
  c["precision_bits"] = o.precision;
  c["seed"] = o.seed;
  c["format"] = o.format;
  c["output"] = o.output;
  return c;
}

Rational rat(const std::string& s, const char* name) {
  if (s.empty()) fail(ErrorCode::InvalidArgument, std::string("--") + name + " is required");
  return parse_rational(s);
}

FillPolicy fill_policy(const Options& o) {
  if (o.fill == "random") return FillPolicy::random(o.seed);
  if (o.fill.rfind("constant:", 0) == 0) {
    const int d = std::stoi(o.fill.substr(9));
    if (d < 0 || d > 255) fail(ErrorCode::InvalidArgument, "fill digit out of range");
    return FillPolicy::constant_digit(static_cast<Digit>(d));
  }
  fail(ErrorCode::InvalidArgument, "--fill is random or constant:<d>");
}

ConstructionSpec construction_spec(const Options& o) {
  return {rat(o.theta, "theta"), rat(o.vhat, "vhat"), fill_policy(o), o.stages, o.raw_digits};
}

DigitSet digit_set(const Options& o) {
  std::vector<unsigned> s;
  std::stringstream ss(o.set);
  std::string item;
  while (std::getline(ss, item, ',')) s.push_back(static_cast<unsigned>(std::stoul(item)));
  return DigitSet::make(o.base, s);
}

BetaSystem beta_of(const std::string& spec, const char* name) {
  if (spec.empty()) fail(ErrorCode::InvalidArgument, std::string("--") + name + " is required");
  return BetaSystem::parse(spec);
}

std::string interval(const Scalar& s, int sig = 30) {
  return "[" + s.lower().to_string(sig) + ", " + s.upper().to_string(sig) + "]";
}

J interval_json(const Scalar& s, int sig = 30) { return J::array({s.lower().to_string(sig), s.upper().to_string(sig)}); }

J schedule_json(const ScheduledRuns& s) {
  J j;
  j["theta"] = to_string(s.theta);
  j["vhat"] = to_string(s.v_hat);
  j["stages"] = s.stages;
  j["marker_width"] = s.marker_width;
  j["n"] = s.n;
  j["m"] = s.m;
  j["t"] = s.t;
  if (s.N > 0) {
    j["N"] = s.N;
    j["l"] = s.l;
    j["h"] = s.h;
    j["delta"] = s.delta;
    j["u"] = s.u;
  }
  return j;
}

DigitWord source_digits(const Options& o, unsigned& base) {
  if (!o.input.empty()) {
    std::ifstream in(o.input);
    if (!in) fail(ErrorCode::InvalidArgument, "cannot open " + o.input);
    DigitFile f = read_digit_file(in);
    base = static_cast<unsigned>(f.base);
    return f.digits;
  }
  base = o.base;
  if (o.digits == 0) fail(ErrorCode::InvalidArgument, "--digits must be positive");
  if (!o.rational.empty()) {
    const Rational q = parse_rational(o.rational);
    return expand_rational(q.get_num(), q.get_den(), o.base, o.digits);
  }
  if (!o.lacunary.empty()) {
    LacunaryRule rule = o.lacunary == "squared" ? LacunaryRule::squared_power() : LacunaryRule::power(parse_rational(o.lacunary));
    return expand_lacunary(o.base, rule, o.digits);
  }
  if (!o.word.empty()) return parse_word(o.word);
  fail(ErrorCode::InvalidArgument, "give --input, --rational, --lacunary or --word");
}

// ------------------------------------------------------------ subcommands

Output cmd_expand(const Options& o) {
  Output out;
  DigitWord w;
  if (!o.beta.empty()) {
    const BetaSystem beta = beta_of(o.beta, "beta");
    w = greedy_expand(beta, rat(o.x, "x"), o.digits);
    out.result["beta"] = beta.label();
    out.result["x"] = o.x;
    out.digits = DigitFile{static_cast<int>(beta.alphabet_top()) + 1, w, {"beta=" + beta.label()}};
  } else {
    unsigned b = 0;
    w = source_digits(o, b);
    out.result["base"] = b;
    out.digits = DigitFile{static_cast<int>(b), w, {}};
  }
  out.result["digits"] = format_word(w, "");
  out.text = format_word(w) + "\n";
  return out;
}

Output cmd_expand_one(const Options& o) {
  Output out;
  const BetaSystem beta = beta_of(o.beta, "beta");
  const DigitWord w = o.finite ? beta.expansion_of_one(o.digits) : expansion_of_one_star(beta, o.digits);
  out.result["beta"] = beta.label();
  out.result["kind"] = o.finite ? "d_beta(1)" : "infinite";
  out.result["digits"] = format_word(w, "");
  if (auto p = beta.simple_parry_length()) out.result["simple_parry_length"] = *p;
  out.text = format_word(w) + "\n";
  out.digits = DigitFile{static_cast<int>(beta.alphabet_top()) + 1, w, {"beta=" + beta.label()}};
  return out;
}

Output cmd_admissible_count(const Options& o) {
  Output out;
  const BetaSystem beta = beta_of(o.beta, "beta");
  const AdmissibleCount c = count_admissible(beta, o.len);
  out.result["beta"] = beta.label();
  out.result["length"] = o.len;
  out.result["count"] = c.count.get_str();
  out.result["renyi_lower"] = c.renyi_lower;
  out.result["renyi_upper"] = c.renyi_upper;
  out.text = c.count.get_str() + "\n";
  out.csv = "length,count\n" + std::to_string(o.len) + "," + c.count.get_str() + "\n";
  return out;
}

Output cmd_admissible_list(const Options& o, std::ostream& stream) {
  Output out;
  const BetaSystem beta = beta_of(o.beta, "beta");
  const auto& a = beta.automaton();
  // depth-first in lexicographic order, streamed
  std::size_t emitted = 0;
  DigitWord w;
  std::function<void(std::size_t)> walk = [&](std::size_t state) {
    if (emitted >= o.limit) return;
    if (w.size() == o.len) {
      if (o.format == "text") stream << format_word(w, "") << "\n";
      ++emitted;
      return;
    }
    for (unsigned d = 0; d <= a.alphabet_top; ++d) {
      if (auto nx = a.step(state, static_cast<Digit>(d))) {
        w.push_back(static_cast<Digit>(d));
        walk(*nx);
        w.pop_back();
      }
    }
  };
  if (o.format == "text") {
    walk(0);
    return out;
  }
  J words = J::array();
  std::function<void(std::size_t)> collect = [&](std::size_t state) {
    if (emitted >= o.limit) return;
    if (w.size() == o.len) {
      words.push_back(format_word(w, ""));
      ++emitted;
      return;
    }
    for (unsigned d = 0; d <= a.alphabet_top; ++d) {
      if (auto nx = a.step(state, static_cast<Digit>(d))) {
        w.push_back(static_cast<Digit>(d));
        collect(*nx);
        w.pop_back();
      }
    }
  };
  collect(0);
  out.result["beta"] = beta.label();
  out.result["length"] = o.len;
  out.result["words"] = words;
  out.csv = "word\n";
  for (const auto& x : words) out.csv += x.get<std::string>() + "\n";
  return out;
}

Output cmd_admissible_check(const Options& o) {
  Output out;
  const BetaSystem beta = beta_of(o.beta, "beta");
  const DigitWord w = parse_word(o.word);
  const bool ok = is_admissible(beta, w);
  out.result["beta"] = beta.label();
  out.result["word"] = format_word(w, "");
  out.result["admissible"] = ok;
  out.text = std::string(ok ? "admissible" : "not admissible") + "\n";
  return out;
}

Output cmd_cylinder(const Options& o) {
  Output out;
  const BetaSystem beta = beta_of(o.beta, "beta");
  const DigitWord w = parse_word(o.word);
  const CylinderInterval c = cylinder(beta, w);
  out.result["beta"] = beta.label();
  out.result["word"] = format_word(w, "");
  out.result["left"] = interval_json(c.left);
  out.result["right"] = interval_json(c.right);
  out.result["length"] = interval_json(c.length);
  out.result["full"] = c.full;
  std::ostringstream t;
  t << "left   " << interval(c.left) << "\nright  " << interval(c.right) << "\nlength " << interval(c.length)
    << "\nfull   " << (c.full ? "yes" : "no") << "\n";
  out.text = t.str();
  return out;
}

Output cmd_exponents(const Options& o) {
  Output out;
  unsigned b = 0;
  const DigitWord w = source_digits(o, b);
  RunOptions ro;
  ro.records_only = o.records;
  ro.zeros_only = o.zeros_only;
  ExponentEstimate est;
  try {
    est = estimate_exponents(run_decomposition(w, b, ro), o.window);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoRuns && e.code() != ErrorCode::InsufficientDepth) throw;
    est = estimate_from_digits(w, b, ro);
  }
  const RelationReport rel = check_relations(est, Rational(1, 50));
  out.result["base"] = b;
  out.result["horizon"] = est.horizon;
  out.result["degenerate"] = est.degenerate;
  out.result["v"] = to_string(est.v_lower);
  out.result["v_hat"] = to_string(est.v_hat_lower);
  out.result["v_float"] = est.v_lower.get_d();
  out.result["v_hat_float"] = est.v_hat_lower.get_d();
  out.result["window"] = est.window;
  out.result["k_over_log_n"] = est.k_over_log_n;
  out.result["relations"] = {{"v_hat<=v", rel.v_hat_le_v},
                             {"v_hat<=v/(1+v)", rel.v_hat_le_v_over_1pv},
                             {"v>=v_hat/(1-v_hat)", rel.v_ge_v_hat_over_1mv_hat}};
  J traj = J::array();
  std::ostringstream csv;
  csv << "k,v_ratio,v_hat_ratio\n";
  for (const auto& p : est.trajectory) {
    traj.push_back({p.k, p.v_ratio.get_d(), p.v_hat_ratio ? J(p.v_hat_ratio->get_d()) : J(nullptr)});
    csv << p.k << ',' << p.v_ratio.get_d() << ',' << (p.v_hat_ratio ? std::to_string(p.v_hat_ratio->get_d()) : "") << '\n';
  }
  out.result["trajectory"] = traj;
  out.csv = csv.str();
  std::ostringstream t;
  t << "v     >= " << est.v_lower.get_d() << "\nv_hat >= " << est.v_hat_lower.get_d() << "\nruns  " << est.trajectory.size()
    << (est.degenerate ? " (degenerate)" : "") << "\n";
  out.text = t.str();
  return out;
}

Output construct_output(const GeneratedWord& g, const std::string& kind, int base, std::vector<std::string> notes) {
  Output out;
  out.result["kind"] = kind;
  out.result["schedule"] = schedule_json(g.schedule);
  out.result["length"] = g.digits.size();
  out.result["last_stage_complete"] = g.last_stage_complete;
  out.result["clamps"] = {{"count", g.clamps.count}, {"unresolved", g.clamps.unresolved}};
  out.result["digits"] = format_word(g.digits, "");
  notes.push_back("clamps=" + std::to_string(g.clamps.count) + " unresolved=" + std::to_string(g.clamps.unresolved));
  out.digits = DigitFile{base, g.digits, std::move(notes)};
  out.sidecar = out.result;
  out.sidecar->erase("digits");
  out.text = format_word(g.digits, "") + "\n";
  return out;
}

Output cmd_construct_bary(const Options& o) {
  return construct_output(generate_bary(construction_spec(o), o.base), "bary", static_cast<int>(o.base), {});
}

Output cmd_construct_restricted(const Options& o) {
  const DigitSet S = digit_set(o);
  return construct_output(generate_restricted(construction_spec(o), S), "restricted", static_cast<int>(o.base),
                          {"S=" + S.to_string()});
}

Output cmd_construct_beta(const Options& o) {
  const BetaSystem beta = beta_of(o.beta, "beta");
  const BetaConstruction bc = generate_beta(construction_spec(o), beta, o.N);
  Output out = construct_output(bc.word, "beta", static_cast<int>(beta.alphabet_top()) + 1,
                                {"beta=" + beta.label(), "beta_N=" + bc.beta_N.label()});
  out.result["admissible_beta_N"] = is_admissible(bc.beta_N, bc.word.digits);
  out.result["admissible_beta"] = is_admissible(beta, bc.word.digits);
  return out;
}

Output cmd_construct_param(const Options& o) {
  const BetaSystem b0 = beta_of(o.beta0, "beta0"), b1 = beta_of(o.beta1, "beta1"), b2 = beta_of(o.beta2, "beta2");
  const ParameterSpaceResult r = generate_parameter_space(b0, b1, b2, o.N, construction_spec(o));
  Output out;
  out.result["word"] = format_word(r.word, "");
  out.result["beta"] = interval_json(r.beta.value(o.precision));
  out.result["beta_tilde"] = r.beta_tilde.label();
  out.result["self_admissible"] = r.self_admissible;
  out.result["lex_below_beta1"] = r.lex_below_beta1;
  out.result["admissible_beta2"] = r.admissible_beta2;
  out.result["above_beta0"] = r.above_beta0 ? J(*r.above_beta0) : J(nullptr);
  out.result["below_beta1"] = r.below_beta1 ? J(*r.below_beta1) : J(nullptr);
  out.result["certified"] = r.certified();
  std::ostringstream t;
  t << "word " << format_word(r.word, "") << "\nbeta " << interval(r.beta.value(o.precision))
    << "\ncertified " << (r.certified() ? "yes" : "no") << "\n";
  out.text = t.str();
  out.digits = DigitFile{static_cast<int>(b2.alphabet_top()) + 1, r.word, {"parameter-space word"}};
  return out;
}

J measure_json(const MeasureValue& mv, long bits) {
  J j;
  j["depth"] = mv.depth;
  if (mv.base != 0) {
    j["base"] = mv.base;
    j["exponent"] = mv.exponent;
  } else {
    J f = J::array();
    for (const auto& x : mv.factors) f.push_back({{"length", x.length}, {"count", x.count.get_str()}, {"multiplicity", x.multiplicity}});
    j["free_positions"] = mv.exponent;
    j["factors"] = f;
  }
  j["log_mu"] = interval_json(mv.log_mu(bits));
  return j;
}

Output cmd_measure(const Options& o) {
  Output out;
  MeasureValue mv;
  const Rational theta = rat(o.theta, "theta"), vh = rat(o.vhat, "vhat");
  if (!o.beta.empty()) {
    const BetaSystem beta = beta_of(o.beta, "beta");
    const BetaSystem bn = beta_N(beta, o.N);
    ScheduledRuns s = with_beta_layout(schedule(theta, vh, o.stages), o.N);
    mv = measure_beta(s, bn, o.depth);
  } else if (!o.set.empty()) {
    mv = measure_restricted(schedule(theta, vh, o.stages), digit_set(o), o.depth);
  } else {
    mv = measure_bary(schedule(theta, vh, o.stages, o.base == 2 ? 2 : 1), o.base, o.depth);
  }
  out.result = measure_json(mv, o.precision);
  std::ostringstream t;
  if (mv.base != 0) t << "mu = " << mv.base << "^-" << mv.exponent << "\n";
  else t << "mu = 1/(" << mv.factors.size() << " count factors)\n";
  t << "log mu " << interval(mv.log_mu(o.precision)) << "\n";
  out.text = t.str();
  return out;
}

Output cmd_dim_formula(const Options& o) {
  Output out;
  const Rational vh = rat(o.vhat, "vhat");
  if (o.sup) {
    const ThetaMaximum m = verify_theta_maximum(vh);
    out.result["theta0"] = to_string(m.theta0);
    out.result["value"] = to_string(m.value);
    out.result["derivative_at_theta0"] = to_string(m.derivative);
    out.result["matches_sup"] = m.matches_sup;
    out.text = to_string(m.value) + "\n";
    return out;
  }
  const Rational theta = rat(o.theta, "theta");
  const Rational f = dim_formula(theta, vh);
  out.result["theta"] = to_string(theta);
  out.result["vhat"] = to_string(vh);
  out.result["value"] = to_string(f);
  out.text = to_string(f) + "\n";
  if (!o.set.empty()) {
    const DigitSet S = digit_set(o);
    const Scalar r = dim_formula(theta, vh, S, o.precision);
    out.result["S"] = S.to_string();
    out.result["restricted_value"] = interval_json(r);
    out.text = r.to_string(20) + "\n";
  }
  return out;
}

Output cmd_dim_local(const Options& o) {
  Output out;
  const Rational theta = rat(o.theta, "theta"), vh = rat(o.vhat, "vhat"), tol = parse_rational(o.tol);
  DimensionReport rep;
  if (!o.beta.empty()) {
    const BetaSystem beta = beta_of(o.beta, "beta");
    rep = local_dimension_beta(with_beta_layout(schedule(theta, vh, o.stages), o.N), beta, beta_N(beta, o.N), o.stages, tol);
  } else if (!o.set.empty()) {
    rep = local_dimension_restricted(schedule(theta, vh, o.stages), digit_set(o), o.stages, tol);
  } else {
    rep = local_dimension_bary(schedule(theta, vh, o.stages, o.base == 2 ? 2 : 1), o.base, o.stages, tol);
  }
  out.result = J::parse(report_json(rep));
  out.csv = report_csv(rep);
  std::ostringstream t;
  t << "limit " << interval(rep.limit, 12) << "\n";
  for (const auto& p : rep.trajectory) {
    t << p.k << ' ' << p.depth << ' ' << (p.exact ? to_string(*p.exact) + " " : "") << p.ratio.midpoint() << "\n";
  }
  out.text = t.str();
  return out;
}

Output cmd_dim_s0(const Options& o) {
  Output out;
  const Rational theta = rat(o.theta, "theta"), vh = rat(o.vhat, "vhat"), eps = parse_rational(o.eps);
  const Rational s0 = critical_exponent_s0(theta, vh, eps);
  out.result["s0"] = to_string(s0);
  out.text = to_string(s0) + "\n";
  if (o.probe) {
    const SeriesProbe p = probe_series(theta, vh, eps, o.base);
    out.result["probe"] = {{"term_slope_below", p.term_slope_below}, {"term_slope_above", p.term_slope_above},
                           {"sum_slope_below", p.sum_slope_below},   {"sum_slope_above", p.sum_slope_above},
                           {"sign_flip", p.sign_flip}};
    std::ostringstream t;
    t << "term slope " << p.term_slope_below << " -> " << p.term_slope_above << ", sign flip " << (p.sign_flip ? "yes" : "no")
      << "\n";
    out.text += t.str();
  }
  return out;
}

Output cmd_parry_check(const Options& o) {
  Output out;
  const InfiniteWord w = parse_infinite_word(o.word);
  const bool ok = is_self_admissible(w);
  out.result["word"] = w.to_string();
  out.result["self_admissible"] = ok;
  out.text = std::string(ok ? "self-admissible" : "not self-admissible") + "\n";
  return out;
}

Output cmd_parry_invert(const Options& o) {
  Output out;
  const InfiniteWord w = parse_infinite_word(o.word);
  const PolyRoot r = parry_invert(w, o.precision);
  const Scalar v = r.value(o.precision);
  out.result["word"] = w.to_string();
  out.result["beta"] = interval_json(v, 40);
  out.result["polynomial"] = r.polynomial().to_string();
  out.text = v.to_string(30) + "\n";
  return out;
}

void emit(const Output& res, const J& config, const Options& o, std::ostream& out) {
  std::ofstream file;
  std::ostream* dst = &out;
  if (!o.output.empty()) {
    file.open(o.output);
    if (!file) fail(ErrorCode::InvalidArgument, "cannot write " + o.output);
    dst = &file;
  }
  const std::string header = std::string("betadim ") + version() + " config " + config.dump();
  if (o.format == "json") {
    J j;
    j["version"] = version();
    j["config"] = config;
    j["result"] = res.result;
    *dst << j.dump(2) << "\n";
  } else if (o.format == "csv") {
    *dst << "# " << header << "\n" << (res.csv.empty() ? "value\n" + res.text : res.csv);
  } else if (o.format == "digits") {
    if (!res.digits) fail(ErrorCode::InvalidArgument, "this command has no digit output");
    DigitFile f = *res.digits;
    f.comments.insert(f.comments.begin(), header);
    write_digit_file(*dst, f);
  } else {
    if (!o.output.empty()) *dst << "# " << header << "\n";
    *dst << res.text;
  }
  if (res.sidecar && !o.output.empty()) {
    std::ofstream side(o.output + ".json");
    J j;
    j["version"] = version();
    j["config"] = config;
    j["result"] = *res.sidecar;
    side << j.dump(2) << "\n";
  }
}

int exit_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return 1;
    case ErrorCode::PrecisionExhausted:
    case ErrorCode::HorizonTooDeep:
    case ErrorCode::UndecidedFiniteness: return 3;
    default: return 2;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diophantine exponents, beta-shifts and Cantor-type constructions"};
  app.name("betadim");
  app.require_subcommand(1);
  app.set_version_flag("--version", version());
  Options o;
  app.add_option("--format", o.format, "text | json | csv | digits")->check(CLI::IsMember({"text", "json", "csv", "digits"}));
  app.add_option("--output,-o", o.output, "write to a file instead of stdout");
  app.add_option("--precision", o.precision, "working precision in bits (env BETADIM_PRECISION)")->check(CLI::Range(16L, 1L << 20));
  app.add_option("--seed", o.seed, "seed for random fills");

  std::string command;
  std::function<Output()> action;
  std::function<void()> stream_action;
  auto leaf = [&](CLI::App* sub, std::string name, std::function<Output()> f) {
    sub->fallthrough();
    sub->callback([&, name, f] {
      command = name;
      action = f;
    });
  };

  auto* expand = app.add_subcommand("expand", "b-ary expansion of a rational or lacunary series, or beta-expansion of x");
  expand->add_option("--base,-b", o.base)->check(CLI::Range(2u, 256u));
  expand->add_option("--rational", o.rational, "p/q in [0,1)");
  expand->add_option("--lacunary", o.lacunary, "v for sum b^-floor((1+v)^j), or 'squared'");
  expand->add_option("--beta", o.beta, "beta spec: int:k, rat:p/q, root:c1,c2,..., word:..., approx:<spec>:N");
  expand->add_option("--x", o.x, "rational x for the beta-expansion");
  expand->add_option("--digits,-n", o.digits)->required();
  leaf(expand, "expand", [&] { return cmd_expand(o); });

  auto* one = app.add_subcommand("expand-one", "expansion of 1 in base beta");
  one->add_option("--beta", o.beta)->required();
  one->add_option("--digits,-n", o.digits)->required();
  one->add_flag("--finite", o.finite, "print d_beta(1) instead of its infinite form");
  leaf(one, "expand-one", [&] { return cmd_expand_one(o); });

  auto* adm = app.add_subcommand("admissible", "admissible words of a beta-shift");
  adm->require_subcommand(1);
  auto* count = adm->add_subcommand("count", "number of admissible words of a length");
  count->add_option("--beta", o.beta)->required();
  count->add_option("--len", o.len)->required();
  leaf(count, "admissible count", [&] { return cmd_admissible_count(o); });
  auto* list = adm->add_subcommand("list", "admissible words in lexicographic order");
  list->add_option("--beta", o.beta)->required();
  list->add_option("--len", o.len)->required();
  list->add_option("--limit", o.limit, "stop after this many words");
  leaf(list, "admissible list", [&] { return cmd_admissible_list(o, out); });
  auto* check = adm->add_subcommand("check", "admissibility of one word");
  check->add_option("--beta", o.beta)->required();
  check->add_option("--word", o.word)->required();
  leaf(check, "admissible check", [&] { return cmd_admissible_check(o); });

  auto* cyl = app.add_subcommand("cylinder", "cylinder interval of a word");
  cyl->add_option("--beta", o.beta)->required();
  cyl->add_option("--word", o.word)->required();
  leaf(cyl, "cylinder", [&] { return cmd_cylinder(o); });

  auto* ex = app.add_subcommand("exponents", "estimate v and vhat from a digit sequence");
  ex->add_option("--input,-i", o.input, "digit-sequence file");
  ex->add_option("--base,-b", o.base)->check(CLI::Range(2u, 256u));
  ex->add_option("--rational", o.rational);
  ex->add_option("--lacunary", o.lacunary);
  ex->add_option("--word", o.word);
  ex->add_option("--digits,-n", o.digits);
  ex->add_option("--window", o.window);
  ex->add_flag("--records", o.records, "keep record runs only (long inputs)");
  ex->add_flag("--zeros-only", o.zeros_only, "runs of 0 only (beta words)");
  leaf(ex, "exponents", [&] { return cmd_exponents(o); });

  auto* con = app.add_subcommand("construct", "Cantor-type constructions");
  con->require_subcommand(1);
  auto add_spec = [&](CLI::App* sub) {
    sub->add_option("--theta", o.theta)->required();
    sub->add_option("--vhat", o.vhat)->required();
    sub->add_option("--stages,-k", o.stages);
    sub->add_option("--digits,-n", o.raw_digits, "raw digit count (last stage may be cut)");
    sub->add_option("--fill", o.fill, "random | constant:<d>");
  };
  auto* cb = con->add_subcommand("bary", "b-ary word");
  add_spec(cb);
  cb->add_option("--base,-b", o.base)->check(CLI::Range(2u, 256u));
  leaf(cb, "construct bary", [&] { return cmd_construct_bary(o); });
  auto* cbeta = con->add_subcommand("beta", "beta word with 0^N 1 0^N markers");
  add_spec(cbeta);
  cbeta->add_option("--beta", o.beta)->required();
  cbeta->add_option("--N", o.N);
  leaf(cbeta, "construct beta", [&] { return cmd_construct_beta(o); });
  auto* cparam = con->add_subcommand("param", "expansion of 1 for a beta between beta0 and beta1");
  add_spec(cparam);
  cparam->add_option("--beta0", o.beta0)->required();
  cparam->add_option("--beta1", o.beta1)->required();
  cparam->add_option("--beta2", o.beta2)->required();
  cparam->add_option("--N", o.N);
  leaf(cparam, "construct param", [&] { return cmd_construct_param(o); });
  auto* cres = con->add_subcommand("restricted", "word with digits in S");
  add_spec(cres);
  cres->add_option("--base,-b", o.base)->check(CLI::Range(3u, 256u));
  cres->add_option("--set,-S", o.set, "comma-separated digits")->required();
  leaf(cres, "construct restricted", [&] { return cmd_construct_restricted(o); });

  auto* meas = app.add_subcommand("measure", "measure of the depth-n cylinder of a construction");
  meas->add_option("--theta", o.theta)->required();
  meas->add_option("--vhat", o.vhat)->required();
  meas->add_option("--stages,-k", o.stages);
  meas->add_option("--depth", o.depth)->required();
  meas->add_option("--base,-b", o.base)->check(CLI::Range(2u, 256u));
  meas->add_option("--set,-S", o.set);
  meas->add_option("--beta", o.beta);
  meas->add_option("--N", o.N);
  leaf(meas, "measure", [&] { return cmd_measure(o); });

  auto* dim = app.add_subcommand("dim", "dimension formulas and local dimensions");
  dim->require_subcommand(1);
  auto* df = dim->add_subcommand("formula", "closed-form dimension");
  df->add_option("--theta", o.theta);
  df->add_option("--vhat", o.vhat)->required();
  df->add_option("--base,-b", o.base);
  df->add_option("--set,-S", o.set);
  df->add_flag("--sup", o.sup, "maximum over theta");
  leaf(df, "dim formula", [&] { return cmd_dim_formula(o); });
  auto* dl = dim->add_subcommand("local", "local-dimension trajectory");
  dl->add_option("--theta", o.theta)->required();
  dl->add_option("--vhat", o.vhat)->required();
  dl->add_option("--stages,-k", o.stages);
  dl->add_option("--base,-b", o.base);
  dl->add_option("--set,-S", o.set);
  dl->add_option("--beta", o.beta);
  dl->add_option("--N", o.N);
  dl->add_option("--tol", o.tol);
  leaf(dl, "dim local", [&] { return cmd_dim_local(o); });
  auto* ds = dim->add_subcommand("s0", "critical exponent of the covering series");
  ds->add_option("--theta", o.theta)->required();
  ds->add_option("--vhat", o.vhat)->required();
  ds->add_option("--eps", o.eps);
  ds->add_option("--base,-b", o.base);
  ds->add_flag("--probe", o.probe, "numeric check of the sign change");
  leaf(ds, "dim s0", [&] { return cmd_dim_s0(o); });

  auto* parry = app.add_subcommand("parry", "expansions of 1 and their bases");
  parry->require_subcommand(1);
  auto* pc = parry->add_subcommand("check", "self-admissibility of a word like 1(10)");
  pc->add_option("--word", o.word)->required();
  leaf(pc, "parry check", [&] { return cmd_parry_check(o); });
  auto* pi = parry->add_subcommand("invert", "beta whose expansion of 1 is the word");
  pi->add_option("--word", o.word)->required();
  leaf(pi, "parry invert", [&] { return cmd_parry_invert(o); });

  std::vector<std::string> argv_store{"betadim"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  try {
    const Output res = action();
    if (!(command == "admissible list" && o.format == "text")) emit(res, config_json(command, o, args), o, out);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::invalid_argument& e) {
    err << "error: bad number: " << e.what() << "\n";
    return 1;
  } catch (const std::out_of_range& e) {
    err << "error: number out of range: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace betadim::cli
