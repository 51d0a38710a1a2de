#pragma once

// CSV and JSON renderings of results, and the run manifest written beside
// every output file.

#include <gmp.h>
#include <mpfr.h>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "bfree/bset.hpp"
#include "bfree/circle.hpp"
#include "bfree/covering.hpp"
#include "bfree/distance.hpp"
#include "bfree/errors.hpp"
#include "bfree/golden.hpp"
#include "bfree/rational.hpp"
#include "bfree/scaling.hpp"

namespace bfree {

inline constexpr const char* kVersion = "0.1.0";

// Decimal rendering of q rounded half away from zero to `digits` places.
inline std::string decimal_string(const Rational& q, unsigned digits = 12) {
  Integer scale = 1;
  for (unsigned i = 0; i < digits; ++i) scale *= 10;
  Rational a = abs(q) * Rational(scale);
  Integer n = floor_of(a + Rational(1, 2));
  std::string s = n.get_str();
  if (s.size() <= digits) s = std::string(digits + 1 - s.size(), '0') + s;
  std::string out = s.substr(0, s.size() - digits);
  if (digits > 0) out += "." + s.substr(s.size() - digits);
  bool zero = n == 0;
  return (q < 0 && !zero ? "-" : "") + out;
}

inline std::string sci_string(double x, int digits = 10) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

inline nlohmann::ordered_json rational_json(const Rational& q) {
  return {{"num", q.get_num().get_str()}, {"den", q.get_den().get_str()}, {"decimal", decimal_string(q, 15)}};
}

inline nlohmann::ordered_json interval_json(const RationalInterval& iv) {
  return {{"lo", rational_json(iv.lo())}, {"hi", rational_json(iv.hi())}};
}

inline nlohmann::ordered_json qsqrt5_json(const QSqrt5& x) {
  return {{"p", x.p().get_str()}, {"q", x.q().get_str()}, {"approx", sci_string(static_cast<double>(x.approx()), 17)}};
}

// ------------------------------------------------------------------ profiles

inline std::string profile_csv(const DistanceProfile& p) {
  std::ostringstream os;
  os << "r,numerator,denominator,decimal\n";
  for (std::size_t r = 0; r < p.values.size(); ++r) {
    const auto& v = p.values[r];
    os << r << ',' << v.get_num().get_str() << ',' << v.get_den().get_str() << ',' << decimal_string(v) << '\n';
  }
  return os.str();
}

// ------------------------------------------------------------------ covering

inline std::string covering_csv(const std::vector<CoveringBounds>& rows) {
  std::ostringstream os;
  os << "epsilon_num,epsilon_den,lower,upper,separated,exact\n";
  for (const auto& cb : rows) {
    os << cb.epsilon.get_num().get_str() << ',' << cb.epsilon.get_den().get_str() << ',' << cb.lower.get_str() << ','
       << cb.upper.get_str() << ',' << (cb.separated ? cb.separated->get_str() : "") << ','
       << (cb.exact ? cb.exact->get_str() : "") << '\n';
  }
  return os.str();
}

inline nlohmann::ordered_json covering_json(const std::vector<CoveringBounds>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& cb : rows) {
    nlohmann::ordered_json j;
    j["epsilon"] = rational_json(cb.epsilon);
    j["lower"] = cb.lower.get_str();
    j["lower_tag"] = cb.lower_tag;
    j["upper"] = cb.upper.get_str();
    j["upper_tag"] = cb.upper_tag;
    j["separated"] = cb.separated ? nlohmann::ordered_json(cb.separated->get_str()) : nlohmann::ordered_json();
    j["exact"] = cb.exact ? nlohmann::ordered_json(cb.exact->get_str()) : nlohmann::ordered_json();
    arr.push_back(j);
  }
  return arr;
}

// ------------------------------------------------------------------- scaling

inline std::string scaling_csv(const ScalingReport& rep) {
  std::ostringstream os;
  os << "n,eps_lo,eps_hi,log_scale,bound_kind,eps_lo_decimal,eps_hi_decimal\n";
  for (const auto& p : rep.points) {
    os << p.index << ',' << p.epsilon.lo().get_str() << ',' << p.epsilon.hi().get_str() << ','
       << sci_string(p.log_scale, 17) << ',' << p.bound_kind << ',' << sci_string(to_double(p.epsilon.lo()), 17) << ','
       << sci_string(to_double(p.epsilon.hi()), 17) << '\n';
  }
  return os.str();
}

inline nlohmann::ordered_json fit_json(const FitResult& f, const std::string& scale) {
  nlohmann::ordered_json j;
  j["scale"] = scale;
  j["exponent"] = f.exponent;
  j["intercept"] = f.intercept;
  j["window"] = {f.first, f.last};
  j["residual_norm"] = f.residual_norm;
  j["residuals"] = f.residuals;
  return j;
}

inline nlohmann::ordered_json scaling_json(const ScalingReport& rep) {
  nlohmann::ordered_json j;
  auto pts = nlohmann::ordered_json::array();
  for (const auto& p : rep.points) {
    pts.push_back({{"n", p.index}, {"epsilon", interval_json(p.epsilon)}, {"log_scale", p.log_scale},
                   {"bound_kind", p.bound_kind}});
  }
  j["points"] = pts;
  j["fit"] = fit_json(rep.fit, rep.scale);
  j["notes"] = rep.notes;
  return j;
}

// ------------------------------------------------------------------ rotation

inline std::string sublevel_csv(const std::vector<Rational>& eps, const std::vector<RationalInterval>& g) {
  std::ostringstream os;
  os << "eps,g_lo,g_hi,eps_decimal,g_lo_decimal,g_hi_decimal\n";
  for (std::size_t i = 0; i < eps.size(); ++i) {
    os << eps[i].get_str() << ',' << g[i].lo().get_str() << ',' << g[i].hi().get_str() << ','
       << sci_string(to_double(eps[i]), 17) << ',' << sci_string(to_double(g[i].lo()), 17) << ','
       << sci_string(to_double(g[i].hi()), 17) << '\n';
  }
  return os.str();
}

inline nlohmann::ordered_json window_json(const WindowStage& st) {
  nlohmann::ordered_json j;
  j["s"] = st.s.get_str();
  j["stage"] = st.stage;
  j["arc_count"] = st.window.circle_arc_count();
  j["measure"] = qsqrt5_json(st.window.measure());
  j["tail_bound"] = rational_json(st.tail_bound);
  auto deltas = nlohmann::ordered_json::array();
  for (std::size_t m = 1; m < st.delta.size(); ++m) deltas.push_back(qsqrt5_json(st.delta[m]));
  j["delta"] = deltas;
  auto arcs = nlohmann::ordered_json::array();
  for (const auto& a : st.window.arcs()) arcs.push_back({{"a", qsqrt5_json(a.a)}, {"b", qsqrt5_json(a.b)}});
  j["arcs"] = arcs;
  return j;
}

inline nlohmann::ordered_json p3_json(const P3Report& rep) {
  nlohmann::ordered_json j;
  j["s"] = rep.s.get_str();
  j["stage"] = rep.stage;
  j["eps_range"] = {{"floor", rational_json(rep.eps_floor)}, {"ceiling", rational_json(rep.eps_ceiling)}};
  j["slope"] = rep.slope;
  j["slope_bounds"] = {rep.slope_min, rep.slope_max};
  j["expected"] = rep.expected;
  j["residuals"] = rep.residuals;
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < rep.eps.size(); ++i)
    rows.push_back({{"eps", rational_json(rep.eps[i])}, {"g", interval_json(rep.g[i])}});
  j["points"] = rows;
  return j;
}

inline std::string bits_string(const std::vector<std::uint8_t>& bits) {
  std::string s;
  s.reserve(bits.size() + 1);
  for (auto b : bits) s.push_back(b ? '1' : '0');
  s.push_back('\n');
  return s;
}

// ------------------------------------------------------------------ manifest

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw ResourceError("SHA-256 computation failed");
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << data;
  if (!out) throw ResourceError("write to '" + path + "' failed");
}

class RunManifest {
 public:
  RunManifest() : start_(std::chrono::steady_clock::now()) {}

  void set_command_line(int argc, char** argv) {
    command_.clear();
    for (int i = 0; i < argc; ++i) command_.push_back(argv[i]);
  }
  void add_input(const std::string& path) { inputs_.push_back({path, sha256_hex(read_file(path))}); }
  void add_input_text(const std::string& label, const std::string& text) { inputs_.push_back({label, sha256_hex(text)}); }
  void add_output(const std::string& path, const std::string& data) { outputs_.push_back({path, sha256_hex(data)}); }
  void set_cap(const std::string& name, nlohmann::ordered_json v) { caps_[name] = std::move(v); }
  void set_seed(std::uint64_t seed) { seed_ = seed; }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["command_line"] = command_;
    auto in = nlohmann::ordered_json::array();
    for (const auto& [p, d] : inputs_) in.push_back({{"path", p}, {"sha256", d}});
    j["inputs"] = in;
    j["versions"] = {{"bfree", kVersion}, {"gmp", gmp_version}, {"mpfr", mpfr_get_version()},
                     {"openssl", OPENSSL_VERSION_TEXT}};
    j["caps"] = caps_;
    if (seed_) j["seed"] = *seed_;
    j["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    auto out = nlohmann::ordered_json::array();
    for (const auto& [p, d] : outputs_) out.push_back({{"path", p}, {"sha256", d}});
    j["outputs"] = out;
    return j;
  }

 private:
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> command_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
  nlohmann::ordered_json caps_ = nlohmann::ordered_json::object();
  std::optional<std::uint64_t> seed_;
};

}  // namespace bfree
