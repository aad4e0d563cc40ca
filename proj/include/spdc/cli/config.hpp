#pragma once

// Run configuration: INI-style text with [section] headers, `key = value`
// lines and `#` comments. Lengths, wavelengths, bandwidths and durations are
// given in the unit named by the key suffix and converted to SI on access.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/fom.hpp"
#include "spdc/optimize.hpp"
#include "spdc/spatial.hpp"
#include "spdc/spectral.hpp"

namespace spdc::cli {

enum class Command { Fom, Sweep, Optimize, XiCurve, Spectral, Selftest };
enum class OutputFormat { Csv, Json };

constexpr std::string_view to_string(Command c) {
  switch (c) {
    case Command::Fom: return "FOM";
    case Command::Sweep: return "SWEEP";
    case Command::Optimize: return "OPTIMIZE";
    case Command::XiCurve: return "XI_CURVE";
    case Command::Spectral: return "SPECTRAL";
    case Command::Selftest: return "SELFTEST";
  }
  return "?";
}

constexpr std::string_view to_string(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

inline std::optional<Command> parse_command(std::string_view s) {
  const std::string u = upper(s);
  for (Command c : {Command::Fom, Command::Sweep, Command::Optimize, Command::XiCurve, Command::Spectral,
                    Command::Selftest}) {
    if (u == to_string(c)) return c;
  }
  return std::nullopt;
}

inline std::optional<Metric> parse_metric(std::string_view s) {
  const std::string u = upper(s);
  for (Metric m : {Metric::K2, Metric::K0, Metric::K1, Metric::Gamma2, Metric::Gamma21}) {
    if (u == to_string(m)) return m;
  }
  return std::nullopt;
}

inline std::optional<OutputFormat> parse_format(std::string_view s) {
  const std::string u = upper(s);
  if (u == "CSV") return OutputFormat::Csv;
  if (u == "JSON") return OutputFormat::Json;
  return std::nullopt;
}

struct SourceConfig {
  double pulse_energy_j = 0.0;
  double chi_eff_pm_per_v = 0.0;
  double lambda_pump_nm = 0.0;
  std::optional<double> lambda_signal_nm;  // degenerate when absent
  double L_mm = 0.0;
  double poling_period_um = 0.0;
  double pump_waist_um = 0.0;
  double n_p = 0.0;
  double n_s = 0.0;
  double n_i = 0.0;
  double n_prime_s = 0.0;
  double n_prime_i = 0.0;

  bool operator==(const SourceConfig&) const = default;
};

struct SpectralSettings {
  double filter_ghz = 0.0;  // intensity FWHM in GHz; dw_F = 2 pi * filter
  double pulse_fwhm_ns = 0.0;
  double pump_detuning_ghz = 0.0;

  double filter_bandwidth() const { return math::kTwoPi * filter_ghz * 1e9; }
  double pulse_fwhm() const { return pulse_fwhm_ns * 1e-9; }
  double delta() const { return relative_pump_bandwidth(pulse_fwhm(), filter_bandwidth()); }

  SpectralConfig shapes() const {
    return {SpectralShape::gaussian(pump_spectral_fwhm(pulse_fwhm())), SpectralShape::gaussian(filter_bandwidth()),
            SpectralShape::gaussian(filter_bandwidth()), math::kTwoPi * pump_detuning_ghz * 1e9};
  }

  bool operator==(const SpectralSettings&) const = default;
};

struct XiLogRange {
  double min = 0.03;
  double max = 40.0;
  std::size_t count = 25;

  bool operator==(const XiLogRange&) const = default;
};

struct SweepSettings {
  Metric metric = Metric::K2;
  std::optional<std::vector<double>> xi_values;
  std::optional<XiLogRange> xi_range;
  AxisRange alpha{0.3, 4.0, 41};
  AxisRange phi0{-2.0, 10.0, 41};
  double refine_tol = 1e-5;

  std::vector<double> xis() const {
    if (xi_values) return *xi_values;
    return log_spaced(xi_range->min, xi_range->max, xi_range->count);
  }

  bool operator==(const SweepSettings&) const = default;
};

struct SpectralCurveSettings {
  double delta_min = 0.0;
  double delta_max = 5.0;
  double delta_step = 0.1;

  std::vector<double> deltas() const {
    const auto n = static_cast<std::size_t>(std::floor((delta_max - delta_min) / delta_step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = delta_min + delta_step * static_cast<double>(k);
    return out;
  }

  bool operator==(const SpectralCurveSettings&) const = default;
};

struct SelftestSettings {
  std::size_t samples = 1'000'000;

  bool operator==(const SelftestSettings&) const = default;
};

struct RunConfig {
  Command command = Command::Fom;
  std::optional<GeometryPoint> geometry;
  std::optional<OpticalIndices> indices;
  std::optional<PolingSeries> poling;
  std::optional<SourceConfig> source;
  std::optional<SpectralSettings> spectral;
  std::optional<SweepSettings> sweep;
  std::optional<SpectralCurveSettings> spectral_curve;
  std::optional<SelftestSettings> selftest;
  std::string output_path;
  OutputFormat output_format = OutputFormat::Csv;
  double tol = 1e-4;
  std::uint64_t seed = 42;

  /// Index ratios: explicit, else derived from the source, else all 1.
  OpticalIndices effective_indices() const {
    if (indices) return *indices;
    if (source) return physical().indices();
    return {};
  }

  PolingSeries effective_poling() const { return poling ? *poling : PolingSeries{}; }

  /// SI view of the source; requires [source] and [spectral].
  PhysicalSource physical() const {
    if (!source || !spectral) throw Error(ErrorCode::kMissingKey, "[source] and [spectral] are both required");
    const SourceConfig& s = *source;
    constexpr double c = kSpeedOfLight;
    PhysicalSource p;
    p.pulse_energy = s.pulse_energy_j;
    p.chi_eff = s.chi_eff_pm_per_v * 1e-12;
    p.crystal_length = s.L_mm * 1e-3;
    p.poling_period = s.poling_period_um * 1e-6;
    p.filter_bandwidth = spectral->filter_bandwidth();
    p.pump_pulse_fwhm = spectral->pulse_fwhm();
    p.omega_p0 = math::kTwoPi * c / (s.lambda_pump_nm * 1e-9);
    p.omega_s0 = s.lambda_signal_nm ? math::kTwoPi * c / (*s.lambda_signal_nm * 1e-9) : 0.5 * p.omega_p0;
    p.omega_i0 = p.omega_p0 - p.omega_s0;
    p.n_p = s.n_p;
    p.n_s = s.n_s;
    p.n_i = s.n_i;
    p.n_prime_s = s.n_prime_s;
    p.n_prime_i = s.n_prime_i;
    p.pump_waist = s.pump_waist_um * 1e-6;
    return p;
  }

  SweepSpec sweep_spec(std::size_t threads) const {
    if (!sweep) throw Error(ErrorCode::kMissingKey, "[sweep] section is required");
    SweepSpec spec;
    spec.metric = sweep->metric;
    spec.xi_values = sweep->xis();
    spec.alpha = sweep->alpha;
    spec.phi0 = sweep->phi0;
    spec.zeta = geometry ? geometry->zeta : 0.0;
    spec.d = geometry ? geometry->d : 0.0;
    spec.indices = effective_indices();
    spec.poling = effective_poling();
    spec.tol = tol;
    spec.refine_tol = sweep->refine_tol;
    spec.threads = threads;
    return spec;
  }

  bool operator==(const RunConfig&) const = default;
};

namespace detail {

struct Entry {
  std::string value;
  int line = 0;
  int column = 0;  // of the value
};

struct Document {
  std::map<std::string, std::map<std::string, Entry>> sections;
  std::map<std::string, int> section_lines;
};

[[noreturn]] inline void parse_error(int line, int column, const std::string& what) {
  throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what);
}

inline bool is_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

inline Document tokenize(std::string_view text) {
  Document doc;
  std::string current;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);

    std::size_t b = 0;
    while (b < line.size() && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    std::size_t e = line.size();
    while (e > b && std::isspace(static_cast<unsigned char>(line[e - 1]))) --e;
    if (b == e) {
      if (end == text.size()) break;
      continue;
    }

    if (line[b] == '[') {
      if (line[e - 1] != ']') parse_error(line_no, static_cast<int>(e), "expected ']'");
      std::string name = line.substr(b + 1, e - b - 2);
      for (std::size_t k = 0; k < name.size(); ++k) {
        if (!is_key_char(name[k])) parse_error(line_no, static_cast<int>(b + 2 + k), "invalid section name");
      }
      if (name.empty()) parse_error(line_no, static_cast<int>(b + 2), "empty section name");
      if (doc.sections.count(name)) parse_error(line_no, static_cast<int>(b + 1), "duplicate section [" + name + "]");
      doc.sections[name];
      doc.section_lines[name] = line_no;
      current = name;
    } else {
      const auto eq = line.find('=', b);
      if (eq == std::string::npos || eq >= e) parse_error(line_no, static_cast<int>(e + 1), "expected '='");
      std::size_t ke = eq;
      while (ke > b && std::isspace(static_cast<unsigned char>(line[ke - 1]))) --ke;
      if (ke == b) parse_error(line_no, static_cast<int>(b + 1), "missing key");
      for (std::size_t k = b; k < ke; ++k) {
        if (!is_key_char(line[k])) parse_error(line_no, static_cast<int>(k + 1), "invalid character in key");
      }
      if (current.empty()) parse_error(line_no, static_cast<int>(b + 1), "key outside of any section");
      std::size_t vb = eq + 1;
      while (vb < e && std::isspace(static_cast<unsigned char>(line[vb]))) ++vb;
      if (vb == e) parse_error(line_no, static_cast<int>(eq + 2), "missing value");
      const std::string key = line.substr(b, ke - b);
      auto& section = doc.sections[current];
      if (section.count(key)) parse_error(line_no, static_cast<int>(b + 1), "duplicate key '" + key + "'");
      section[key] = Entry{line.substr(vb, e - vb), line_no, static_cast<int>(vb + 1)};
    }
    if (end == text.size()) break;
  }
  return doc;
}

// Typed access to one section; every key read is marked, leftovers are
// reported as unknown.
class SectionReader {
 public:
  SectionReader(std::string name, const std::map<std::string, Entry>* entries)
      : name_(std::move(name)), entries_(entries) {}

  bool has(const std::string& key) const { return entries_ && entries_->count(key); }

  const Entry* find(const std::string& key) {
    if (!entries_) return nullptr;
    const auto it = entries_->find(key);
    if (it == entries_->end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  const Entry& require(const std::string& key) {
    const Entry* e = find(key);
    if (!e) throw Error(ErrorCode::kMissingKey, "[" + name_ + "] " + key);
    return *e;
  }

  static double to_double(const Entry& e) {
    double v = 0.0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
      parse_error(e.line, e.column + static_cast<int>(ptr - first), "expected a number, got '" + e.value + "'");
    }
    return v;
  }

  static std::uint64_t to_count(const Entry& e) {
    std::uint64_t v = 0;
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      parse_error(e.line, e.column + static_cast<int>(ptr - first), "expected a nonnegative integer, got '" + e.value + "'");
    }
    return v;
  }

  double number(const std::string& key, double fallback) {
    const Entry* e = find(key);
    return e ? to_double(*e) : fallback;
  }
  double number(const std::string& key) { return to_double(require(key)); }
  std::optional<double> maybe_number(const std::string& key) {
    const Entry* e = find(key);
    return e ? std::optional<double>(to_double(*e)) : std::nullopt;
  }
  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    const Entry* e = find(key);
    return e ? to_count(*e) : fallback;
  }

  std::vector<double> number_list(const Entry& e) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= e.value.size()) {
      std::size_t comma = e.value.find(',', start);
      if (comma == std::string::npos) comma = e.value.size();
      std::size_t b = start, t = comma;
      while (b < t && std::isspace(static_cast<unsigned char>(e.value[b]))) ++b;
      while (t > b && std::isspace(static_cast<unsigned char>(e.value[t - 1]))) --t;
      out.push_back(to_double(Entry{e.value.substr(b, t - b), e.line, e.column + static_cast<int>(b)}));
      start = comma + 1;
    }
    return out;
  }

  void finish() const {
    if (!entries_) return;
    for (const auto& [key, entry] : *entries_) {
      if (!used_.count(key)) {
        throw Error(ErrorCode::kUnknownKey, "line " + std::to_string(entry.line) + ": [" + name_ + "] " + key);
      }
    }
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  const std::map<std::string, Entry>* entries_;
  std::set<std::string> used_;
};

inline void unit_range(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kUnitRange, what);
}

inline void positive(double v, const std::string& what) { unit_range(v > 0.0, what + " must be positive"); }

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline PolingSeries parse_poling(const Entry& e) {
  std::vector<PolingTerm> terms;
  std::size_t start = 0;
  while (start <= e.value.size()) {
    std::size_t comma = e.value.find(',', start);
    if (comma == std::string::npos) comma = e.value.size();
    const std::string item = e.value.substr(start, comma - start);
    const auto colon = item.find(':');
    const int col = e.column + static_cast<int>(start);
    if (colon == std::string::npos) parse_error(e.line, col, "poling terms are written 'delta_m:r'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto t = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, t - b + 1);
    };
    const std::string m = trim(item.substr(0, colon));
    int dm = 0;
    const auto [ptr, ec] = std::from_chars(m.data(), m.data() + m.size(), dm);
    if (ec != std::errc() || ptr != m.data() + m.size() || m.empty()) {
      parse_error(e.line, col, "poling order must be an integer, got '" + m + "'");
    }
    const double r = SectionReader::to_double(Entry{trim(item.substr(colon + 1)), e.line, col + static_cast<int>(colon) + 1});
    terms.push_back({dm, r});
    start = comma + 1;
  }
  try {
    return PolingSeries(std::move(terms));
  } catch (const Error& err) {
    throw Error(ErrorCode::kUnitRange, std::string("[poling] terms: ") + err.what());
  }
}

}  // namespace detail

/// Parses and validates a configuration. `command_override`, when given,
/// replaces [run] command (the CLI passes its positional argument here).
inline RunConfig parse_config(std::string_view text, std::optional<Command> command_override = std::nullopt) {
  using detail::SectionReader;
  const detail::Document doc = detail::tokenize(text);
  static const std::set<std::string> known = {"run", "geometry", "indices", "poling", "source",
                                              "spectral", "sweep", "spectral_curve", "selftest"};
  for (const auto& [name, entries] : doc.sections) {
    if (!known.count(name)) {
      throw Error(ErrorCode::kUnknownKey, "line " + std::to_string(doc.section_lines.at(name)) + ": section [" + name + "]");
    }
  }
  auto section = [&](const std::string& name) {
    const auto it = doc.sections.find(name);
    return SectionReader(name, it == doc.sections.end() ? nullptr : &it->second);
  };
  auto present = [&](const std::string& name) { return doc.sections.count(name) > 0; };

  RunConfig cfg;

  {
    SectionReader run = section("run");
    if (const auto* e = run.find("command")) {
      const auto c = parse_command(e->value);
      if (!c) detail::parse_error(e->line, e->column, "unknown command '" + e->value + "'");
      cfg.command = *c;
    } else if (!command_override) {
      throw Error(ErrorCode::kMissingKey, "[run] command");
    }
    if (command_override) cfg.command = *command_override;
    if (const auto* e = run.find("output_format")) {
      const auto f = parse_format(e->value);
      if (!f) detail::parse_error(e->line, e->column, "output_format must be csv or json");
      cfg.output_format = *f;
    }
    if (const auto* e = run.find("output_path")) cfg.output_path = e->value;
    cfg.tol = run.number("tol", cfg.tol);
    detail::positive(cfg.tol, "[run] tol");
    cfg.seed = run.count("seed", cfg.seed);
    run.finish();
  }

  if (present("source")) {
    SectionReader s = section("source");
    SourceConfig src;
    src.pulse_energy_j = s.number("pulse_energy_j");
    src.chi_eff_pm_per_v = s.number("chi_eff_pm_per_v");
    src.lambda_pump_nm = s.number("lambda_pump_nm");
    src.lambda_signal_nm = s.maybe_number("lambda_signal_nm");
    src.L_mm = s.number("L_mm");
    src.poling_period_um = s.number("poling_period_um");
    src.pump_waist_um = s.number("pump_waist_um");
    src.n_p = s.number("n_p");
    src.n_s = s.number("n_s");
    src.n_i = s.number("n_i");
    src.n_prime_s = s.number("n_prime_s");
    src.n_prime_i = s.number("n_prime_i");
    s.finish();
    detail::positive(src.pulse_energy_j, "[source] pulse_energy_j");
    detail::unit_range(src.chi_eff_pm_per_v >= 0.0, "[source] chi_eff_pm_per_v must be nonnegative");
    detail::positive(src.lambda_pump_nm, "[source] lambda_pump_nm");
    if (src.lambda_signal_nm) {
      detail::unit_range(*src.lambda_signal_nm > src.lambda_pump_nm,
                         "[source] lambda_signal_nm must exceed lambda_pump_nm");
    }
    detail::positive(src.L_mm, "[source] L_mm");
    detail::positive(src.poling_period_um, "[source] poling_period_um");
    detail::positive(src.pump_waist_um, "[source] pump_waist_um");
    for (double n : {src.n_p, src.n_s, src.n_i, src.n_prime_s, src.n_prime_i}) {
      detail::positive(n, "[source] refractive indices");
    }
    cfg.source = src;
  }

  if (present("spectral")) {
    SectionReader s = section("spectral");
    SpectralSettings sp;
    sp.filter_ghz = s.number("filter_ghz");
    sp.pulse_fwhm_ns = s.number("pulse_fwhm_ns");
    sp.pump_detuning_ghz = s.number("pump_detuning_ghz", 0.0);
    s.finish();
    detail::positive(sp.filter_ghz, "[spectral] filter_ghz");
    detail::positive(sp.pulse_fwhm_ns, "[spectral] pulse_fwhm_ns");
    cfg.spectral = sp;
  }
  if (cfg.source && !cfg.spectral) throw Error(ErrorCode::kMissingKey, "[spectral] is required with [source]");

  if (present("geometry")) {
    SectionReader g = section("geometry");
    GeometryPoint p;
    if (cfg.source && cfg.spectral && !g.has("xi")) {
      p.xi = cfg.physical().xi();
    } else {
      p.xi = g.number("xi");
    }
    p.alpha = g.number("alpha");
    p.zeta = g.number("zeta", 0.0);
    p.phi0 = g.number("phi0", 0.0);
    p.d = g.number("d", 0.0);
    g.finish();
    detail::positive(p.xi, "[geometry] xi");
    detail::positive(p.alpha, "[geometry] alpha");
    detail::unit_range(std::abs(p.d) <= 0.1, "[geometry] |d| must not exceed 0.1");
    cfg.geometry = p;
  }

  if (present("indices")) {
    SectionReader s = section("indices");
    OpticalIndices n;
    n.np_over_ns = s.number("np_over_ns", 1.0);
    n.np_over_ni = s.number("np_over_ni", 1.0);
    n.np_over_nps = s.number("np_over_nps", 1.0);
    n.np_over_npi = s.number("np_over_npi", 1.0);
    s.finish();
    for (double r : {n.np_over_ns, n.np_over_ni, n.np_over_nps, n.np_over_npi}) {
      detail::positive(r, "[indices] ratios");
    }
    cfg.indices = n;
  }

  if (present("poling")) {
    SectionReader s = section("poling");
    cfg.poling = detail::parse_poling(s.require("terms"));
    s.finish();
  }

  if (present("sweep")) {
    SectionReader s = section("sweep");
    SweepSettings sw;
    const detail::Entry& m = s.require("metric");
    const auto metric = parse_metric(m.value);
    if (!metric) detail::parse_error(m.line, m.column, "unknown metric '" + m.value + "'");
    sw.metric = *metric;
    if (const auto* e = s.find("xi_values")) {
      sw.xi_values = s.number_list(*e);
      for (double xi : *sw.xi_values) detail::positive(xi, "[sweep] xi_values");
    }
    if (s.has("xi_min") || s.has("xi_max") || s.has("xi_count")) {
      if (sw.xi_values) throw Error(ErrorCode::kUnitRange, "[sweep] give either xi_values or xi_min/xi_max/xi_count");
      XiLogRange r;
      r.min = s.number("xi_min");
      r.max = s.number("xi_max");
      r.count = s.count("xi_count", r.count);
      detail::positive(r.min, "[sweep] xi_min");
      detail::unit_range(r.max > r.min, "[sweep] xi_max must exceed xi_min");
      detail::unit_range(r.count >= 2, "[sweep] xi_count must be at least 2");
      sw.xi_range = r;
    }
    if (!sw.xi_values && !sw.xi_range) throw Error(ErrorCode::kMissingKey, "[sweep] xi_values or xi_min/xi_max");
    sw.alpha = {s.number("alpha_min", sw.alpha.lo), s.number("alpha_max", sw.alpha.hi),
                s.count("alpha_n", sw.alpha.n)};
    sw.phi0 = {s.number("phi0_min", sw.phi0.lo), s.number("phi0_max", sw.phi0.hi), s.count("phi0_n", sw.phi0.n)};
    sw.refine_tol = s.number("refine_tol", sw.refine_tol);
    s.finish();
    detail::positive(sw.alpha.lo, "[sweep] alpha_min");
    detail::unit_range(sw.alpha.hi > sw.alpha.lo && sw.alpha.n >= 2, "[sweep] alpha range needs max > min and n >= 2");
    detail::unit_range(sw.phi0.hi > sw.phi0.lo && sw.phi0.n >= 2, "[sweep] phi0 range needs max > min and n >= 2");
    detail::positive(sw.refine_tol, "[sweep] refine_tol");
    cfg.sweep = sw;
  }

  if (present("spectral_curve")) {
    SectionReader s = section("spectral_curve");
    SpectralCurveSettings sc;
    sc.delta_min = s.number("delta_min", sc.delta_min);
    sc.delta_max = s.number("delta_max", sc.delta_max);
    sc.delta_step = s.number("delta_step", sc.delta_step);
    s.finish();
    detail::unit_range(sc.delta_min >= 0.0, "[spectral_curve] delta_min must be nonnegative");
    detail::unit_range(sc.delta_max >= sc.delta_min, "[spectral_curve] delta_max must not be below delta_min");
    detail::positive(sc.delta_step, "[spectral_curve] delta_step");
    cfg.spectral_curve = sc;
  }

  if (present("selftest")) {
    SectionReader s = section("selftest");
    SelftestSettings st;
    st.samples = s.count("samples", st.samples);
    s.finish();
    detail::unit_range(st.samples >= kMinOracleSamples, "[selftest] samples must be at least 100000");
    cfg.selftest = st;
  }

  switch (cfg.command) {
    case Command::Fom:
      if (!cfg.geometry) throw Error(ErrorCode::kMissingKey, "[geometry] is required for FOM");
      break;
    case Command::Sweep:
    case Command::Optimize:
    case Command::XiCurve:
      if (!cfg.sweep) throw Error(ErrorCode::kMissingKey, "[sweep] is required for " + std::string(to_string(cfg.command)));
      if (cfg.command != Command::Sweep && cfg.sweep->metric != Metric::K2 && cfg.sweep->metric != Metric::Gamma2 &&
          cfg.sweep->metric != Metric::Gamma21) {
        throw Error(ErrorCode::kUnitRange, "[sweep] metric must be K2, GAMMA2 or GAMMA21 for maximization");
      }
      break;
    case Command::Spectral:
      if (!cfg.spectral_curve) cfg.spectral_curve = SpectralCurveSettings{};
      break;
    case Command::Selftest:
      if (!cfg.selftest) cfg.selftest = SelftestSettings{};
      break;
  }
  return cfg;
}

/// Text form that parse_config maps back to an equal RunConfig.
inline std::string render_config(const RunConfig& c, bool include_output = true) {
  using detail::format_double;
  std::ostringstream o;
  o << "[run]\n";
  o << "command = " << to_string(c.command) << "\n";
  if (include_output) {
    o << "output_format = " << to_string(c.output_format) << "\n";
    if (!c.output_path.empty()) o << "output_path = " << c.output_path << "\n";
  }
  o << "tol = " << format_double(c.tol) << "\n";
  o << "seed = " << c.seed << "\n";
  if (c.geometry) {
    const auto& g = *c.geometry;
    o << "\n[geometry]\nxi = " << format_double(g.xi) << "\nalpha = " << format_double(g.alpha)
      << "\nzeta = " << format_double(g.zeta) << "\nphi0 = " << format_double(g.phi0) << "\nd = " << format_double(g.d)
      << "\n";
  }
  if (c.indices) {
    const auto& n = *c.indices;
    o << "\n[indices]\nnp_over_ns = " << format_double(n.np_over_ns) << "\nnp_over_ni = " << format_double(n.np_over_ni)
      << "\nnp_over_nps = " << format_double(n.np_over_nps) << "\nnp_over_npi = " << format_double(n.np_over_npi) << "\n";
  }
  if (c.poling) {
    o << "\n[poling]\nterms = ";
    const auto& t = c.poling->terms();
    for (std::size_t k = 0; k < t.size(); ++k) o << (k ? ", " : "") << t[k].delta_m << ":" << format_double(t[k].r);
    o << "\n";
  }
  if (c.source) {
    const auto& s = *c.source;
    o << "\n[source]\npulse_energy_j = " << format_double(s.pulse_energy_j)
      << "\nchi_eff_pm_per_v = " << format_double(s.chi_eff_pm_per_v)
      << "\nlambda_pump_nm = " << format_double(s.lambda_pump_nm) << "\n";
    if (s.lambda_signal_nm) o << "lambda_signal_nm = " << format_double(*s.lambda_signal_nm) << "\n";
    o << "L_mm = " << format_double(s.L_mm) << "\npoling_period_um = " << format_double(s.poling_period_um)
      << "\npump_waist_um = " << format_double(s.pump_waist_um) << "\nn_p = " << format_double(s.n_p)
      << "\nn_s = " << format_double(s.n_s) << "\nn_i = " << format_double(s.n_i)
      << "\nn_prime_s = " << format_double(s.n_prime_s) << "\nn_prime_i = " << format_double(s.n_prime_i) << "\n";
  }
  if (c.spectral) {
    const auto& s = *c.spectral;
    o << "\n[spectral]\nfilter_ghz = " << format_double(s.filter_ghz) << "\npulse_fwhm_ns = " << format_double(s.pulse_fwhm_ns)
      << "\npump_detuning_ghz = " << format_double(s.pump_detuning_ghz) << "\n";
  }
  if (c.sweep) {
    const auto& s = *c.sweep;
    o << "\n[sweep]\nmetric = " << to_string(s.metric) << "\n";
    if (s.xi_values) {
      o << "xi_values = ";
      for (std::size_t k = 0; k < s.xi_values->size(); ++k) o << (k ? ", " : "") << format_double((*s.xi_values)[k]);
      o << "\n";
    }
    if (s.xi_range) {
      o << "xi_min = " << format_double(s.xi_range->min) << "\nxi_max = " << format_double(s.xi_range->max)
        << "\nxi_count = " << s.xi_range->count << "\n";
    }
    o << "alpha_min = " << format_double(s.alpha.lo) << "\nalpha_max = " << format_double(s.alpha.hi)
      << "\nalpha_n = " << s.alpha.n << "\nphi0_min = " << format_double(s.phi0.lo)
      << "\nphi0_max = " << format_double(s.phi0.hi) << "\nphi0_n = " << s.phi0.n
      << "\nrefine_tol = " << format_double(s.refine_tol) << "\n";
  }
  if (c.spectral_curve) {
    const auto& s = *c.spectral_curve;
    o << "\n[spectral_curve]\ndelta_min = " << format_double(s.delta_min) << "\ndelta_max = " << format_double(s.delta_max)
      << "\ndelta_step = " << format_double(s.delta_step) << "\n";
  }
  if (c.selftest) o << "\n[selftest]\nsamples = " << c.selftest->samples << "\n";
  return o.str();
}

}  // namespace spdc::cli
