#pragma once

// Command dispatch and CSV/JSON serialization for spdc-coupler.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "spdc/cli/config.hpp"
#include "spdc/fom.hpp"
#include "spdc/optimize.hpp"
#include "spdc/spatial.hpp"
#include "spdc/spectral.hpp"

namespace spdc::cli {

using Value = std::variant<double, std::int64_t, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
  std::optional<double> argmax_xi;  // XI_CURVE only
};

struct RunResult {
  Table table;
  bool nonconverged = false;
  bool checks_failed = false;  // SELFTEST

  int exit_code() const { return checks_failed ? 1 : (nonconverged ? 2 : 0); }
};

namespace detail {

inline std::string format_sig9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

[[noreturn]] inline void rethrow_at(const Error& e, const GeometryPoint& p) {
  char buf[128];
  std::snprintf(buf, sizeof buf, " at (xi, alpha, phi0) = (%.9g, %.9g, %.9g)", p.xi, p.alpha, p.phi0);
  throw Error(e.code(), e.detail() + buf);
}

inline Table run_fom(const RunConfig& c) {
  const GeometryPoint& p = *c.geometry;
  const OpticalIndices n = c.effective_indices();
  const PolingSeries poling = c.effective_poling();
  const auto options = cubature_at(c.tol);

  Table t;
  t.columns = {"xi", "alpha", "zeta", "phi0", "d", "k0", "k0_err", "k1", "k1_err", "k2", "k2_err",
               "gamma1", "gamma2", "gamma21"};
  std::vector<Value> row = {p.xi, p.alpha, p.zeta, p.phi0, p.d};
  try {
    KFactors k;
    std::optional<FomResult> fom;
    if (c.source) {
      fom = absolute_probabilities(c.physical(), p, n, poling, c.spectral->shapes(), options);
      k = fom->k;
    } else {
      k = k_factors(p, n, poling, options);
    }
    const Efficiencies e = efficiencies(k);
    row.insert(row.end(), {k.k0.value, k.k0.error, k.k1.value, k.k1.error, k.k2.value, k.k2.error, e.gamma1,
                           e.gamma2, e.gamma21});
    if (c.spectral) {
      const SpectralConfig shapes = c.spectral->shapes();
      const double dw = c.spectral->filter_bandwidth();
      t.columns.insert(t.columns.end(), {"delta", "omega1_over_dwf", "omega2_over_dwf"});
      row.insert(row.end(), {c.spectral->delta(), omega1_over_bandwidth(shapes.filter_signal, dw),
                             omega2_over_bandwidth(shapes, dw)});
    }
    if (fom) {
      t.columns.insert(t.columns.end(), {"prefactor", "p0", "p1", "p2"});
      row.insert(row.end(), {fom->prefactor, fom->p0, fom->p1, fom->p2});
    }
    t.columns.push_back("converged");
    row.push_back(k.k0.converged && k.k1.converged && k.k2.converged);
  } catch (const Error& e) {
    rethrow_at(e, p);
  }
  t.rows.push_back(std::move(row));
  return t;
}

inline Table run_sweep(const RunConfig& c, std::size_t threads) {
  const SweepSpec spec = c.sweep_spec(threads);
  spec.validate();
  const std::string m = lower(to_string(spec.metric));
  Table t;
  t.columns = {"xi", "alpha", "phi0", m, m + "_err", "converged"};
  for (double xi : spec.xi_values) {
    const GridResult grid = sweep_grid(spec, xi);
    for (const GridCell& cell : grid.cells) {
      t.rows.push_back({xi, cell.alpha, cell.phi0, cell.value, cell.error, cell.converged});
    }
  }
  return t;
}

inline Table optimum_table(const std::vector<OptimumRecord>& records, Metric metric) {
  const std::string m = lower(to_string(metric));
  Table t;
  t.columns = {"xi", "alpha_opt", "phi0_opt", m, m + "_err", "k0_at_opt", "converged", "iterations"};
  for (const auto& r : records) {
    t.rows.push_back({r.xi, r.alpha_opt, r.phi0_opt, r.metric_value, r.metric_error, r.k0_at_opt, r.converged,
                      static_cast<std::int64_t>(r.iterations)});
  }
  return t;
}

inline Table run_optimize(const RunConfig& c, std::size_t threads) {
  const SweepSpec spec = c.sweep_spec(threads);
  return optimum_table(xi_curve(spec), spec.metric);
}

inline Table run_xi_curve(const RunConfig& c, std::size_t threads) {
  const SweepSpec spec = c.sweep_spec(threads);
  const auto curve = xi_curve(spec);
  Table t = optimum_table(curve, spec.metric);
  t.argmax_xi = interpolated_argmax(curve);
  return t;
}

inline Table run_spectral(const RunConfig& c) {
  Table t;
  t.columns = {"delta", "omega2_factor"};
  for (const auto& pt : spectral_curve(c.spectral_curve->deltas())) t.rows.push_back({pt.delta, pt.omega2_factor});
  return t;
}

struct Check {
  std::string name;
  double value;
  double reference;
  double tolerance;  // absolute
};

inline Table run_selftest(const RunConfig& c, bool& failed) {
  const std::size_t samples = c.selftest->samples;
  const auto options = cubature_at(c.tol);
  std::vector<Check> checks;

  const GeometryPoint points[] = {{1.0, 1.0, 0.0, 2.0, 0.0}, {2.84, 1.414, 0.0, 3.2, 0.0}, {0.5, 2.0, 0.0, 1.0, 0.0}};
  const char* names[] = {"k0", "k1", "k2"};
  std::uint64_t stream = 0;
  for (const auto& p : points) {
    const KFactors k = k_factors(p, {}, {}, options);
    const KValue* cub[] = {&k.k0, &k.k1, &k.k2};
    for (int f = 0; f < 3; ++f) {
      const KValue mc = k_oracle_mc(p, {}, {}, static_cast<KFactor>(f), samples, c.seed + stream++);
      const double sigma = std::hypot(cub[f]->error, mc.error);
      char label[96];
      std::snprintf(label, sizeof label, "%s_oracle(xi=%g;alpha=%g;phi0=%g)", names[f], p.xi, p.alpha, p.phi0);
      checks.push_back({label, cub[f]->value, mc.value, std::max(3.0 * sigma, 0.01 * std::abs(mc.value))});
    }
  }

  const double w0 = std::sqrt(math::kPi / (8.0 * kLn2));
  checks.push_back({"omega2_factor(0)", omega2_factor_gaussian(0.0), w0, 1e-12});
  checks.push_back({"omega2_factor(sqrt2)", omega2_factor_gaussian(std::numbers::sqrt2), w0 / std::numbers::sqrt2, 1e-12});

  const double xi = 0.01, a = 1.5, phi0 = 1.0;
  const double s = math::sinc(phi0 / 2.0);
  const KFactors low = k_factors({xi, a, 0.0, phi0, 0.0}, {}, {}, options);
  const double k2_ref = 8.0 / math::kPi * xi * s * s / std::pow(a * a + 2.0, 2);
  const double k1_ref = 2.0 / math::kPi * xi * s * s / (1.0 + a * a);
  checks.push_back({"k2_low_focusing", low.k2.value, k2_ref, 0.02 * k2_ref});
  checks.push_back({"k1_low_focusing", low.k1.value, k1_ref, 0.02 * k1_ref});

  // Pair rate with the pump at phase matching and xi = 1: 1/8.
  const KValue k0 = k0_factor({1.0, 1.0, 0.0, 0.0, 0.0}, {}, {}, options);
  checks.push_back({"k0(xi=1;phi0=0)", k0.value, 0.125, 0.01 * 0.125});

  Table t;
  t.columns = {"check", "value", "reference", "delta", "tolerance", "pass"};
  failed = false;
  for (const auto& ch : checks) {
    const double delta = ch.value - ch.reference;
    const bool pass = std::abs(delta) <= ch.tolerance;
    failed = failed || !pass;
    t.rows.push_back({ch.name, ch.value, ch.reference, delta, ch.tolerance, pass});
  }
  return t;
}

inline std::size_t converged_column(const Table& t) {
  for (std::size_t k = 0; k < t.columns.size(); ++k) {
    if (t.columns[k] == "converged") return k;
  }
  return t.columns.size();
}

inline std::string quote(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace detail

/// Runs the configured command. Module errors propagate as spdc::Error.
inline RunResult run(const RunConfig& config, std::size_t threads = 1) {
  RunResult r;
  switch (config.command) {
    case Command::Fom: r.table = detail::run_fom(config); break;
    case Command::Sweep: r.table = detail::run_sweep(config, threads); break;
    case Command::Optimize: r.table = detail::run_optimize(config, threads); break;
    case Command::XiCurve: r.table = detail::run_xi_curve(config, threads); break;
    case Command::Spectral: r.table = detail::run_spectral(config); break;
    case Command::Selftest: r.table = detail::run_selftest(config, r.checks_failed); break;
  }
  const std::size_t col = detail::converged_column(r.table);
  if (col < r.table.columns.size()) {
    for (const auto& row : r.table.rows) {
      if (!std::get<bool>(row[col])) r.nonconverged = true;
    }
  }
  return r;
}

inline std::string to_csv(const RunConfig& config, const Table& t) {
  std::ostringstream o;
  o << "# config: " << detail::quote(render_config(config, false)) << "\n";
  for (std::size_t k = 0; k < t.columns.size(); ++k) o << (k ? "," : "") << t.columns[k];
  o << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) o << ",";
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              o << detail::format_sig9(v);
            } else if constexpr (std::is_same_v<T, bool>) {
              o << (v ? "true" : "false");
            } else {
              o << v;
            }
          },
          row[k]);
    }
    o << "\n";
  }
  return o.str();
}

inline std::string to_json(const RunConfig& config, const Table& t) {
  using nlohmann::ordered_json;
  // Same 9 significant digits as the CSV.
  auto rounded = [](double v) -> ordered_json {
    if (!std::isfinite(v)) return nullptr;
    return std::strtod(detail::format_sig9(v).c_str(), nullptr);
  };
  ordered_json doc;
  doc["config"] = render_config(config, false);
  doc["command"] = std::string(to_string(config.command));
  ordered_json records = ordered_json::array();
  for (const auto& row : t.rows) {
    ordered_json rec = ordered_json::object();
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              rec[t.columns[k]] = rounded(v);
            } else {
              rec[t.columns[k]] = v;
            }
          },
          row[k]);
    }
    records.push_back(std::move(rec));
  }
  doc["records"] = std::move(records);
  if (t.argmax_xi) doc["argmax_xi"] = rounded(*t.argmax_xi);
  return doc.dump(2) + "\n";
}

inline std::string serialize(const RunConfig& config, const Table& t) {
  return config.output_format == OutputFormat::Csv ? to_csv(config, t) : to_json(config, t);
}

/// Writes `text` to `path`, or to stdout when the path is empty.
inline void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path + " for writing");
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace spdc::cli
