// bfree: command-line front end.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bfree/bfree.hpp"

namespace {

using namespace bfree;

struct Common {
  std::string format = "csv";
  std::string out;
  bool manifest = false;
  std::uint64_t subset_cap = 20;
  std::uint64_t period_cap = 100'000'000;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--format", c.format, "csv or structured")->check(CLI::IsMember({"csv", "structured"}));
  sub->add_option("--out", c.out, "output file (default: stdout)");
  sub->add_flag("--manifest", c.manifest, "also emit a manifest when writing to stdout");
}

void add_caps(CLI::App* sub, Common& c) {
  sub->add_option("--subset-cap", c.subset_cap, "inclusion-exclusion subset cap");
  sub->add_option("--period-cap", c.period_cap, "period cap for eta words");
}

Caps caps_of(const Common& c) { return Caps{static_cast<std::size_t>(c.subset_cap), c.period_cap}; }

// "a" or "a..b"
std::pair<Integer, Integer> parse_range(const std::string& text) {
  auto pos = text.find("..");
  auto parse_int = [](const std::string& s) {
    Rational q = parse_rational(s);
    if (q.get_den() != 1) throw ValidationError("expected an integer, got '" + s + "'");
    return Integer(q.get_num());
  };
  if (pos == std::string::npos) {
    Integer a = parse_int(text);
    return {a, a};
  }
  Integer a = parse_int(text.substr(0, pos)), b = parse_int(text.substr(pos + 2));
  if (b < a) throw ValidationError("empty range '" + text + "'");
  return {a, b};
}

std::pair<std::size_t, std::size_t> parse_index_range(const std::string& text) {
  auto [a, b] = parse_range(text);
  if (a < 0 || !fits_u64(b)) throw ValidationError("index range must be non-negative");
  return {static_cast<std::size_t>(to_u64(a)), static_cast<std::size_t>(to_u64(b))};
}

// Writes the result to --out (with a manifest beside it) or to stdout.
void emit(const Common& c, RunManifest& m, const std::string& data) {
  if (c.out.empty()) {
    std::cout << data;
    std::cout.flush();
    if (c.manifest) std::cerr << m.to_json().dump(2) << '\n';
    return;
  }
  write_file(c.out, data);
  m.add_output(c.out, data);
  write_file(c.out + ".manifest.json", m.to_json().dump(2) + "\n");
}

void record_caps(RunManifest& m, const Common& c) {
  m.set_cap("subset_cap", c.subset_cap);
  m.set_cap("period_cap", c.period_cap);
}

// --------------------------------------------------------------- distance

struct DistanceArgs {
  Common common;
  std::string bset;
  std::string r = "0";
  bool cross_check = false;
  std::optional<std::size_t> tail;
};

std::string run_distance(const DistanceArgs& a, RunManifest& m) {
  BSet b = load_bset_spec(a.bset);
  m.add_input(a.bset);
  record_caps(m, a.common);
  for (const auto& n : b.notices()) std::cerr << "notice: " << n << '\n';
  const Caps caps = caps_of(a.common);
  auto [r0, r1] = parse_range(a.r);
  if (r1 - r0 > 10'000'000) throw ResourceError("r range longer than 10^7");
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::ostringstream csv;
  if (b.is_infinite()) {
    std::size_t n = a.tail.value_or(b.size());
    m.set_cap("tail", n);
    BSet full = b.materialize(n);
    csv << "r,lo,hi,lo_decimal,hi_decimal\n";
    for (Integer r = r0; r <= r1; ++r) {
      auto iv = d1_shift_coprime(full, r, n);
      csv << r.get_str() << ',' << iv.lo().get_str() << ',' << iv.hi().get_str() << ',' << decimal_string(iv.lo(), 15)
          << ',' << decimal_string(iv.hi(), 15) << '\n';
      rows.push_back({{"r", r.get_str()}, {"value", interval_json(iv)}, {"width", rational_json(iv.width())}});
    }
  } else {
    const auto& el = b.elements();
    const Integer l = lcm_of(el);
    std::optional<ShiftDistanceEngine> engine;
    if (el.size() <= caps.subset_cap) engine.emplace(el, caps);
    std::optional<PeriodicWord> word;
    if (a.cross_check) {
      if (!fits_u64(l) || to_u64(l) > caps.period_cap)
        throw ResourceError("cross-check needs the periodic oracle but the period exceeds the cap");
      word.emplace(eta_word(b, caps));
    }
    if (!engine && !word) {
      if (!fits_u64(l) || to_u64(l) > caps.period_cap)
        throw ResourceError("neither the subset cap nor the period cap admits this B");
      word.emplace(eta_word(b, caps));
    }
    const bool coprime = pairwise_coprime(el);
    csv << "r,numerator,denominator,decimal,oracle_numerator,oracle_denominator,agree\n";
    for (Integer r = r0; r <= r1; ++r) {
      Integer rr = r % l;
      if (rr < 0) rr += l;
      std::optional<Rational> formula, oracle;
      if (engine) formula = engine->d1(rr);
      if (word) oracle = d1_oracle_periodic(*word, rr);
      bool agree = true;
      if (a.cross_check) {
        if (formula) agree = *formula == *oracle;
        if (coprime) agree = agree && d1_shift_coprime(b, rr, b.size()).lo() == *oracle;
        if (!agree) {
          throw CrossCheckError("paths disagree at r=" + r.get_str() + ": formula " +
                                (formula ? formula->get_str() : std::string("n/a")) + ", oracle " + oracle->get_str());
        }
      }
      const Rational& v = formula ? *formula : *oracle;
      csv << r.get_str() << ',' << v.get_num().get_str() << ',' << v.get_den().get_str() << ',' << decimal_string(v)
          << ',' << (a.cross_check ? oracle->get_num().get_str() : "") << ','
          << (a.cross_check ? oracle->get_den().get_str() : "") << ',' << (a.cross_check ? "yes" : "") << '\n';
      nlohmann::ordered_json row;
      row["r"] = r.get_str();
      row["value"] = rational_json(v);
      if (a.cross_check) {
        row["oracle"] = rational_json(*oracle);
        row["agree"] = agree;
      }
      rows.push_back(row);
    }
  }
  if (a.common.format == "csv") return csv.str();
  nlohmann::ordered_json doc;
  doc["bset"] = nlohmann::json::parse(to_spec(b));
  doc["rows"] = rows;
  return doc.dump(2) + "\n";
}

// --------------------------------------------------------------- covering

struct CoveringArgs {
  Common common;
  std::string bset;
  std::vector<std::string> eps;
  std::string eps_grid;
  bool no_exact = false;
  std::uint64_t exact_cap = 2000;
};

// "log:N": N geometric points from half the smallest positive profile value to
// twice the largest, as 24-bit dyadics, increasing.
std::vector<Rational> covering_grid(const DistanceProfile& p, const std::string& spec) {
  if (spec.rfind("log:", 0) != 0) throw ValidationError("eps grid must look like log:N");
  auto [n, n2] = parse_index_range(spec.substr(4));
  if (n != n2 || n < 2 || n > 10000) throw ValidationError("grid size must be in 2..10000");
  std::optional<Rational> lo, hi;
  for (const auto& v : p.values) {
    if (v <= 0) continue;
    if (!lo || v < *lo) lo = v;
    if (!hi || v > *hi) hi = v;
  }
  if (!lo) throw ValidationError("profile has no positive distances");
  Rational a = *lo / 2, b = *hi * 2;
  const double la = log_abs(a), lb = log_abs(b);
  std::vector<Rational> out;
  for (std::size_t i = 0; i < n; ++i) {
    double t = la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.push_back(round_up_dyadic(from_long_double(std::exp(static_cast<long double>(t))), 24));
  }
  return out;
}

std::string run_covering(const CoveringArgs& a, RunManifest& m) {
  BSet b = load_bset_spec(a.bset);
  m.add_input(a.bset);
  record_caps(m, a.common);
  m.set_cap("exact_cap", a.exact_cap);
  require_finite(b);
  const Caps caps = caps_of(a.common);
  Integer l = lcm_of(b.elements());
  if (!fits_u64(l) || to_u64(l) > caps.period_cap) throw ResourceError("period exceeds the period cap");
  if (!a.no_exact && to_u64(l) > a.exact_cap)
    throw ResourceError("period " + l.get_str() + " exceeds the exact-cover cap; pass --no-exact or raise --exact-cap");
  auto prof = distance_profile(b, to_u64(l) - 1, caps);
  std::vector<Rational> grid;
  for (const auto& e : a.eps) grid.push_back(parse_rational(e));
  if (!a.eps_grid.empty()) {
    auto g = covering_grid(prof, a.eps_grid);
    grid.insert(grid.end(), g.begin(), g.end());
  }
  if (grid.empty()) throw ValidationError("give --eps or --eps-grid");
  std::vector<CoveringBounds> rows;
  for (const auto& e : grid) rows.push_back(covering_bounds(prof, e, !a.no_exact, a.exact_cap));
  if (a.common.format == "csv") return covering_csv(rows);
  nlohmann::ordered_json doc;
  doc["bset"] = nlohmann::json::parse(to_spec(b));
  doc["period"] = l.get_str();
  doc["rows"] = covering_json(rows);
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------- scaling

struct ScalingArgs {
  Common common;
  std::string family;
  std::string kappa;
  std::string c_list;
  std::string n = "3..12";
  std::string scale;
  std::optional<std::size_t> tail;
  std::optional<std::size_t> fit_first;
  std::optional<std::size_t> fit_last;
  double slope = 2.0;
  std::size_t points = 10;
  std::string summary;
};

FitResult refit(const ScalingReport& rep, const std::string& scale, const FitWindow& w) {
  return scale == "power-exp" ? fit_power_exponential_exponent(rep.points, w) : fit_dimensional_exponent(rep.points, w);
}

std::string run_scaling(const ScalingArgs& a, RunManifest& m, std::string& summary_out) {
  FitWindow window{a.fit_first, a.fit_last};
  std::vector<ScalingReport> reports;
  nlohmann::ordered_json summary;
  summary["family"] = a.family;
  if (a.family == "toeplitz") {
    auto [lo, hi] = parse_index_range(a.n);
    ToeplitzRule rule;
    if (!a.kappa.empty()) {
      rule.r_rule = ToeplitzRule::RRule::kappa;
      rule.kappa = parse_rational(a.kappa);
      if (rule.kappa <= 0) throw ValidationError("kappa must be positive");
      summary["kappa"] = rule.kappa.get_str();
      summary["expected"] = to_double((1 + rule.kappa) / rule.kappa);
    } else {
      summary["r_rule"] = "linear";
    }
    std::size_t tail = a.tail.value_or(40);
    if (!a.c_list.empty()) {
      std::stringstream ss(a.c_list);
      std::string item;
      while (std::getline(ss, item, ',')) {
        Rational q = parse_rational(item);
        if (q.get_den() != 1) throw ValidationError("c values must be integers");
        rule.c_explicit.push_back(Integer(q.get_num()));
      }
    }
    m.set_cap("tail", tail);
    auto ts = toeplitz_scaling(rule, lo, hi, tail, window);
    if (!rule.c_explicit.empty())
      ts.upper.notes.push_back("user-supplied c values: the growth condition behind the exponent claim is not checked");
    std::string scale = a.scale.empty() ? "dimensional" : a.scale;
    ts.upper.scale = ts.lower.scale = scale;
    ts.upper.fit = refit(ts.upper, scale, window);
    ts.lower.fit = refit(ts.lower, scale, window);
    reports = {ts.upper, ts.lower};
    summary["upper"] = fit_json(ts.upper.fit, scale);
    summary["lower"] = fit_json(ts.lower.fit, scale);
    summary["notes"] = ts.upper.notes;
  } else if (a.family == "squarefree") {
    auto [lo, hi] = parse_index_range(a.n);
    std::size_t tail = a.tail.value_or(std::max<std::size_t>(1100 * hi, hi + 1));
    m.set_cap("tail", tail);
    auto rep = squarefree_scaling(lo, hi, tail, window);
    std::string scale = a.scale.empty() ? "power-exp" : a.scale;
    rep.scale = scale;
    rep.fit = refit(rep, scale, window);
    auto ref = reference_twelve_over_pi2();
    rep.notes.push_back("reference 12/pi^2 in [" + decimal_string(ref.lo(), 12) + ", " + decimal_string(ref.hi(), 12) +
                        "]");
    reports = {rep};
    summary["fit"] = fit_json(rep.fit, scale);
    summary["notes"] = rep.notes;
  } else if (a.family == "synthetic") {
    if (a.points < 3) throw ValidationError("synthetic data needs at least 3 points");
    std::string scale = a.scale.empty() ? "dimensional" : a.scale;
    ScalingReport rep;
    rep.scale = scale;
    for (std::size_t i = 1; i <= a.points; ++i) {
      Rational e = make_rational(1, pow2(i));
      double x = static_cast<double>(i) * std::log(2.0);
      double y = scale == "power-exp" ? std::exp(a.slope * x) : a.slope * x;
      rep.points.push_back({static_cast<long long>(i), RationalInterval(e), y, "synthetic"});
    }
    rep.fit = refit(rep, scale, window.first || window.last ? window : FitWindow{0, rep.points.size()});
    reports = {rep};
    summary["fit"] = fit_json(rep.fit, scale);
  } else {
    throw ValidationError("unknown family '" + a.family + "'");
  }
  summary_out = summary.dump(2) + "\n";
  if (a.common.format == "csv") {
    std::string out;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      std::string part = scaling_csv(reports[i]);
      out += i == 0 ? part : part.substr(part.find('\n') + 1);
    }
    return out;
  }
  nlohmann::ordered_json doc = summary;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(scaling_json(r));
  doc["reports"] = arr;
  return doc.dump(2) + "\n";
}

// --------------------------------------------------------------- rotation

struct RotationArgs {
  Common common;
  std::string s = "2";
  std::size_t stage = 10;
  std::size_t stage_cap = 20;
  std::size_t breakpoint_cap = 200'000;
  std::string mode = "auto";
  std::vector<std::string> eps;
  double decades = 2.0;
  std::size_t points = 9;
  std::string h;
  bool random_h = false;
  std::uint64_t seed = 20240521;
  long long len = 1000;
  std::optional<long long> k_min;
};

SublevelOptions sublevel_options(const RotationArgs& a) {
  SublevelOptions o;
  o.breakpoint_cap = a.breakpoint_cap;
  o.mode = a.mode == "exact" ? SublevelMode::exact : a.mode == "grid" ? SublevelMode::grid : SublevelMode::automatic;
  return o;
}

void record_rotation(RunManifest& m, const RotationArgs& a) {
  m.add_input_text("s", a.s);
  m.set_cap("stage_cap", a.stage_cap);
  m.set_cap("breakpoint_cap", a.breakpoint_cap);
}

std::string run_rotation(const std::string& which, const RotationArgs& a, RunManifest& m) {
  record_rotation(m, a);
  Rational s = parse_rational(a.s);
  auto st = build_window(s, a.stage, a.stage_cap);
  if (st.window.circle_arc_count() > 4 * to_u64(fib_q(a.stage)))
    throw CrossCheckError("interval count exceeds 4 q_n");
  if (which == "build") {
    if (a.common.format == "structured") return window_json(st).dump(2) + "\n";
    std::ostringstream os;
    os << "a_p,a_q,b_p,b_q,a_approx,b_approx\n";
    for (const auto& arc : st.window.arcs()) {
      os << arc.a.p().get_str() << ',' << arc.a.q().get_str() << ',' << arc.b.p().get_str() << ','
         << arc.b.q().get_str() << ',' << sci_string(static_cast<double>(arc.a.approx()), 17) << ','
         << sci_string(static_cast<double>(arc.b.approx()), 17) << '\n';
    }
    return os.str();
  }
  if (which == "sublevel") {
    std::vector<Rational> grid;
    for (const auto& e : a.eps) grid.push_back(parse_rational(e));
    if (grid.empty()) grid = log_grid(st.tail_bound, a.decades, a.points);
    std::vector<RationalInterval> g;
    auto opt = sublevel_options(a);
    for (const auto& e : grid) g.push_back(sublevel_mass(st.window, e, opt));
    if (a.common.format == "csv") return sublevel_csv(grid, g);
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < grid.size(); ++i)
      rows.push_back({{"eps", rational_json(grid[i])}, {"g", interval_json(g[i])}});
    nlohmann::ordered_json doc;
    doc["s"] = s.get_str();
    doc["stage"] = a.stage;
    doc["rows"] = rows;
    return doc.dump(2) + "\n";
  }
  if (which == "code") {
    QSqrt5 h;
    if (a.random_h) {
      h = random_points(1, a.seed).front();
      m.set_seed(a.seed);
    } else {
      if (a.h.empty()) throw ValidationError("give --h or --random");
      h = QSqrt5(parse_rational(a.h));
    }
    if (a.len < 1) throw ValidationError("--len must be positive");
    long long k0 = a.k_min.value_or(0);
    auto word = code_orbit(st.window, h, k0, k0 + a.len - 1);
    if (a.common.format == "csv") return bits_string(word.bits);
    nlohmann::ordered_json doc;
    doc["h"] = qsqrt5_json(h);
    doc["k_min"] = k0;
    doc["bits"] = bits_string(word.bits).substr(0, word.bits.size());
    return doc.dump(2) + "\n";
  }
  // p3
  auto rep = verify_P3_slope(st, a.decades, a.points, sublevel_options(a));
  if (a.common.format == "structured") return p3_json(rep).dump(2) + "\n";
  std::ostringstream os;
  os << "# s=" << rep.s.get_str() << " stage=" << rep.stage << " slope=" << sci_string(rep.slope)
     << " expected=" << sci_string(rep.expected) << " eps_floor=" << sci_string(to_double(rep.eps_floor))
     << " eps_ceiling=" << sci_string(to_double(rep.eps_ceiling)) << '\n';
  os << sublevel_csv(rep.eps, rep.g);
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"B-free subshifts and golden-rotation codings: distances, covering numbers, scaling exponents"};
  app.require_subcommand(1);
  RunManifest manifest;
  manifest.set_command_line(argc, argv);

  DistanceArgs da;
  auto* dist = app.add_subcommand("distance", "d_1(eta, sigma^r eta) per r");
  dist->add_option("--bset", da.bset, "B-set spec file")->required();
  dist->add_option("--r", da.r, "shift r or range a..b");
  dist->add_flag("--cross-check", da.cross_check, "compare against the periodic oracle");
  dist->add_option("--tail", da.tail, "truncation index for infinite families");
  add_common(dist, da.common);
  add_caps(dist, da.common);

  CoveringArgs ca;
  auto* cov = app.add_subcommand("covering", "covering-number bounds");
  cov->add_option("--bset", ca.bset, "B-set spec file")->required();
  cov->add_option("--eps", ca.eps, "epsilon (repeatable)");
  cov->add_option("--eps-grid", ca.eps_grid, "log:N");
  cov->add_flag("--no-exact", ca.no_exact, "skip the exact cover");
  cov->add_option("--exact-cap", ca.exact_cap, "largest period for the exact cover");
  add_common(cov, ca.common);
  add_caps(cov, ca.common);

  ScalingArgs sa;
  auto* sc = app.add_subcommand("scaling", "family epsilon sequences and exponent fits");
  sc->add_option("--family", sa.family, "toeplitz, squarefree or synthetic")->required();
  sc->add_option("--kappa", sa.kappa, "r_i = floor(kappa log2(c_1...c_i)); default r_i = i");
  sc->add_option("--c", sa.c_list, "explicit comma-separated c values (toeplitz)");
  sc->add_option("--n", sa.n, "index range a..b");
  sc->add_option("--scale", sa.scale, "dimensional or power-exp")->check(CLI::IsMember({"dimensional", "power-exp"}));
  sc->add_option("--tail", sa.tail, "truncation beyond n");
  sc->add_option("--fit-first", sa.fit_first, "first point of the fit window (sorted by decreasing eps)");
  sc->add_option("--fit-last", sa.fit_last, "one past the last point of the fit window");
  sc->add_option("--slope", sa.slope, "synthetic slope");
  sc->add_option("--points", sa.points, "synthetic point count");
  sc->add_option("--summary", sa.summary, "fit summary file");
  add_common(sc, sa.common);

  RotationArgs ra;
  auto* rot = app.add_subcommand("rotation", "golden-rotation windows");
  rot->require_subcommand(1);
  std::string rot_which;
  for (const char* name : {"build", "sublevel", "code", "p3"}) {
    auto* sub = rot->add_subcommand(name);
    sub->add_option("--s", ra.s, "rational s in (1, 8]");
    sub->add_option("--stage", ra.stage, "stage n");
    sub->add_option("--stage-cap", ra.stage_cap, "largest stage allowed");
    add_common(sub, ra.common);
    std::string nm = name;
    if (nm == "sublevel" || nm == "p3") {
      sub->add_option("--mode", ra.mode, "exact, grid or auto")->check(CLI::IsMember({"exact", "grid", "auto"}));
      sub->add_option("--breakpoint-cap", ra.breakpoint_cap, "exact-mode breakpoint cap");
      sub->add_option("--decades", ra.decades, "decades spanned by the eps grid");
      sub->add_option("--points", ra.points, "eps grid size");
    }
    if (nm == "sublevel") sub->add_option("--eps", ra.eps, "epsilon (repeatable)");
    if (nm == "code") {
      // -h is taken by --h below
      sub->set_help_flag("--help", "Print this help message and exit");
      sub->add_option("--h", ra.h, "starting point h (rational or decimal)");
      sub->add_flag("--random", ra.random_h, "draw h from the seeded generator");
      sub->add_option("--seed", ra.seed, "seed for --random");
      sub->add_option("--len", ra.len, "number of bits");
      sub->add_option("--k-min", ra.k_min, "first index k");
    }
    sub->callback([&rot_which, nm] { rot_which = nm; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (dist->parsed()) {
      emit(da.common, manifest, run_distance(da, manifest));
    } else if (cov->parsed()) {
      emit(ca.common, manifest, run_covering(ca, manifest));
    } else if (sc->parsed()) {
      std::string summary;
      std::string data = run_scaling(sa, manifest, summary);
      std::string summary_path = sa.summary;
      if (summary_path.empty() && !sa.common.out.empty()) summary_path = sa.common.out + ".fit.json";
      if (sa.common.format == "csv") {
        if (summary_path.empty()) {
          std::cerr << summary;
        } else {
          write_file(summary_path, summary);
          manifest.add_output(summary_path, summary);
        }
      }
      emit(sa.common, manifest, data);
    } else if (rot->parsed()) {
      emit(ra.common, manifest, run_rotation(rot_which, ra, manifest));
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const CrossCheckError& e) {
    std::cerr << "cross-check failure: " << e.what() << '\n';
    return 3;
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
