#pragma once

// Grid sweeps over (alpha, phi0), per-xi maximization and xi curves.
//
// Grid cells are independent and may run on any number of threads; every
// result is stored at its own index, so output does not depend on the
// schedule.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/spatial.hpp"
#include "spdc/spectral.hpp"

namespace spdc {

enum class Metric { K2, K0, K1, Gamma2, Gamma21 };

constexpr std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::K2: return "K2";
    case Metric::K0: return "K0";
    case Metric::K1: return "K1";
    case Metric::Gamma2: return "GAMMA2";
    case Metric::Gamma21: return "GAMMA21";
  }
  return "?";
}

struct AxisRange {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 2;

  double at(std::size_t i) const {
    if (i + 1 == n) return hi;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  double step() const { return (hi - lo) / static_cast<double>(n - 1); }
  double clamp(double x) const { return std::clamp(x, lo, hi); }

  void validate(const char* name) const {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi) || n < 2) {
      throw Error(ErrorCode::kInvalidArgument, std::string(name) + " range needs lo < hi and n >= 2");
    }
  }

  bool operator==(const AxisRange&) const = default;
};

/// n values spaced evenly in log between lo and hi, both included.
inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) {
    throw Error(ErrorCode::kInvalidArgument, "log spacing needs 0 < lo < hi and n >= 2");
  }
  std::vector<double> out(n);
  const double ratio = std::log(hi / lo);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.back() = hi;
  return out;
}

struct SweepSpec {
  Metric metric = Metric::K2;
  std::vector<double> xi_values;
  AxisRange alpha{0.3, 4.0, 41};
  AxisRange phi0{-2.0, 10.0, 41};
  double zeta = 0.0;
  double d = 0.0;
  OpticalIndices indices;
  PolingSeries poling;
  double tol = 1e-4;         // relative tolerance for grid cells
  double refine_tol = 1e-5;  // relative tolerance inside the simplex search
  std::size_t threads = 1;

  void validate() const {
    alpha.validate("alpha");
    phi0.validate("phi0");
    if (!(alpha.lo > 0.0)) throw Error(ErrorCode::kInvalidArgument, "alpha range must be positive");
    for (double xi : xi_values) {
      if (!(xi > 0.0) || !std::isfinite(xi)) throw Error(ErrorCode::kInvalidArgument, "xi values must be positive");
    }
    if (!(tol > 0.0) || !(refine_tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tolerances must be positive");
    indices.validate();
  }

  GeometryPoint point(double xi, double a, double p) const { return {xi, a, zeta, p, d}; }
};

struct MetricSample {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

inline math::CubatureOptions cubature_at(double rel_tol) {
  math::CubatureOptions o;
  o.rel_tol = rel_tol;
  return o;
}

namespace detail {

inline MetricSample ratio(const KValue& num, const KValue& den, const char* name) {
  if (!(den.value > den.error) || !(den.value > 0.0)) {
    throw Error(ErrorCode::kDivisionByZeroK, std::string(name) + " is not resolved from zero");
  }
  const double r = num.value / den.value;
  const double err = std::abs(r) * (num.error / std::max(std::abs(num.value), 1e-300) + den.error / den.value);
  return {r, num.value == 0.0 ? num.error / den.value : err, num.converged && den.converged};
}

inline MetricSample from_k(const KValue& k) { return {k.value, k.error, k.converged}; }

// Runs body(i) for i in [0, n) on up to `threads` workers. The first
// exception thrown by any worker is rethrown after all have joined.
template <class Body>
void parallel_for(std::size_t n, std::size_t threads, Body&& body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace detail

/// Evaluates a metric at one point. `k0` may supply a precomputed K0 for the
/// same (xi, phi0), since K0 does not depend on alpha.
inline MetricSample evaluate_metric(Metric metric, const GeometryPoint& p, const OpticalIndices& indices,
                                    const PolingSeries& poling, const math::CubatureOptions& options,
                                    const KValue* k0 = nullptr) {
  auto get_k0 = [&] { return k0 ? *k0 : k0_factor(p, indices, poling, options); };
  switch (metric) {
    case Metric::K2: return detail::from_k(k2_factor(p, indices, poling, options));
    case Metric::K1: return detail::from_k(k1_factor(p, indices, poling, options));
    case Metric::K0: return detail::from_k(get_k0());
    case Metric::Gamma2: return detail::ratio(k2_factor(p, indices, poling, options), get_k0(), "k0");
    case Metric::Gamma21:
      return detail::ratio(k2_factor(p, indices, poling, options), k1_factor(p, indices, poling, options), "k1");
  }
  return {};
}

struct GridCell {
  double alpha = 0.0;
  double phi0 = 0.0;
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  bool failed = false;  // evaluation raised an error; value is NaN
};

struct GridResult {
  double xi = 0.0;
  Metric metric = Metric::K2;
  std::size_t n_alpha = 0;
  std::size_t n_phi0 = 0;
  std::vector<GridCell> cells;  // alpha outer, phi0 inner

  const GridCell& at(std::size_t i, std::size_t j) const { return cells[i * n_phi0 + j]; }

  // Index of the largest finite cell; ties go to the first in row-major order.
  std::size_t best_index() const {
    std::size_t best = cells.size();
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (cells[k].failed) continue;
      if (best == cells.size() || cells[k].value > cells[best].value) best = k;
    }
    if (best == cells.size()) throw Error(ErrorCode::kInvalidArgument, "every grid cell failed");
    return best;
  }
};

/// Dense evaluation of spec.metric over alpha x phi0 at fixed xi.
inline GridResult sweep_grid(const SweepSpec& spec, double xi) {
  spec.validate();
  if (!(xi > 0.0)) throw Error(ErrorCode::kInvalidArgument, "xi must be positive");
  const auto options = cubature_at(spec.tol);
  GridResult grid{xi, spec.metric, spec.alpha.n, spec.phi0.n, std::vector<GridCell>(spec.alpha.n * spec.phi0.n)};

  const bool needs_k0 = spec.metric == Metric::K0 || spec.metric == Metric::Gamma2;
  std::vector<KValue> k0_column(needs_k0 ? spec.phi0.n : 0);
  std::vector<char> k0_failed(k0_column.size(), 0);
  if (needs_k0) {
    detail::parallel_for(spec.phi0.n, spec.threads, [&](std::size_t j) {
      try {
        k0_column[j] = k0_factor(spec.point(xi, spec.alpha.lo, spec.phi0.at(j)), spec.indices, spec.poling, options);
      } catch (const Error&) {
        k0_failed[j] = 1;
      }
    });
  }

  detail::parallel_for(grid.cells.size(), spec.threads, [&](std::size_t k) {
    const std::size_t i = k / spec.phi0.n, j = k % spec.phi0.n;
    GridCell& cell = grid.cells[k];
    cell.alpha = spec.alpha.at(i);
    cell.phi0 = spec.phi0.at(j);
    try {
      if (needs_k0 && k0_failed[j]) throw Error(ErrorCode::kInvalidArgument, "k0 failed");
      const auto s = evaluate_metric(spec.metric, spec.point(xi, cell.alpha, cell.phi0), spec.indices,
                                     spec.poling, options, needs_k0 ? &k0_column[j] : nullptr);
      cell.value = s.value;
      cell.error = s.error;
      cell.converged = s.converged;
    } catch (const Error&) {
      cell.value = std::numeric_limits<double>::quiet_NaN();
      cell.error = std::numeric_limits<double>::quiet_NaN();
      cell.converged = false;
      cell.failed = true;
    }
  });
  return grid;
}

struct OptimumRecord {
  double xi = 0.0;
  double alpha_opt = 0.0;
  double phi0_opt = 0.0;
  double metric_value = 0.0;
  double metric_error = 0.0;
  Metric metric = Metric::K2;
  bool converged = false;
  double k0_at_opt = 0.0;  // K0 at (xi, phi0_opt)
  std::size_t iterations = 0;
};

struct SimplexOptions {
  std::size_t max_iterations = 200;
  double diameter_tol = 1e-3;
};

/// Grid search followed by a bounded Nelder-Mead refinement from the best
/// cell. If the simplex stalls, the best grid cell is returned with
/// converged = false.
inline OptimumRecord maximize_at_xi(const SweepSpec& spec, double xi, const SimplexOptions& simplex = {}) {
  if (spec.metric != Metric::K2 && spec.metric != Metric::Gamma2 && spec.metric != Metric::Gamma21) {
    throw Error(ErrorCode::kInvalidArgument, "maximization supports K2, GAMMA2 and GAMMA21");
  }
  const GridResult grid = sweep_grid(spec, xi);
  const GridCell& start = grid.cells[grid.best_index()];
  const auto fine = cubature_at(spec.refine_tol);

  struct Vertex {
    double a, p;
    MetricSample s;
  };
  auto eval = [&](double a, double p) {
    a = spec.alpha.clamp(a);
    p = spec.phi0.clamp(p);
    MetricSample s;
    try {
      s = evaluate_metric(spec.metric, spec.point(xi, a, p), spec.indices, spec.poling, fine);
    } catch (const Error&) {
      s = {-std::numeric_limits<double>::infinity(), 0.0, false};
    }
    return Vertex{a, p, s};
  };
  auto better = [](const Vertex& x, const Vertex& y) { return x.s.value > y.s.value; };

  const double ha = spec.alpha.step(), hp = spec.phi0.step();
  const double a1 = start.alpha + ha <= spec.alpha.hi ? start.alpha + ha : start.alpha - ha;
  const double p1 = start.phi0 + hp <= spec.phi0.hi ? start.phi0 + hp : start.phi0 - hp;
  std::vector<Vertex> v{eval(start.alpha, start.phi0), eval(a1, start.phi0), eval(start.alpha, p1)};

  bool shrunk = false;
  std::size_t iter = 0;
  for (; iter < simplex.max_iterations; ++iter) {
    std::stable_sort(v.begin(), v.end(), better);
    double da = 0.0, dp = 0.0;
    for (int x = 0; x < 3; ++x) {
      for (int y = x + 1; y < 3; ++y) {
        da = std::max(da, std::abs(v[x].a - v[y].a));
        dp = std::max(dp, std::abs(v[x].p - v[y].p));
      }
    }
    if (da < simplex.diameter_tol && dp < simplex.diameter_tol) {
      shrunk = true;
      break;
    }
    const double ca = 0.5 * (v[0].a + v[1].a), cp = 0.5 * (v[0].p + v[1].p);
    const Vertex r = eval(ca + (ca - v[2].a), cp + (cp - v[2].p));
    if (better(r, v[0])) {
      const Vertex e = eval(ca + 2.0 * (ca - v[2].a), cp + 2.0 * (cp - v[2].p));
      v[2] = better(e, r) ? e : r;
    } else if (better(r, v[1])) {
      v[2] = r;
    } else {
      const bool outside = better(r, v[2]);
      const Vertex c = outside ? eval(ca + 0.5 * (r.a - ca), cp + 0.5 * (r.p - cp))
                               : eval(ca + 0.5 * (v[2].a - ca), cp + 0.5 * (v[2].p - cp));
      if (better(c, outside ? r : v[2])) {
        v[2] = c;
      } else {
        for (int x = 1; x < 3; ++x) v[x] = eval(v[0].a + 0.5 * (v[x].a - v[0].a), v[0].p + 0.5 * (v[x].p - v[0].p));
      }
    }
  }
  std::stable_sort(v.begin(), v.end(), better);

  OptimumRecord rec;
  rec.xi = xi;
  rec.metric = spec.metric;
  rec.iterations = iter;
  bool certified = false;
  if (shrunk && v[0].s.converged) {
    // Local maximality on a stencil of half the grid spacing.
    certified = true;
    const double steps[4][2] = {{0.5 * ha, 0.0}, {-0.5 * ha, 0.0}, {0.0, 0.5 * hp}, {0.0, -0.5 * hp}};
    for (const auto& st : steps) {
      const Vertex n = eval(v[0].a + st[0], v[0].p + st[1]);
      if (n.s.value > v[0].s.value + v[0].s.error + n.s.error) certified = false;
    }
  }
  if (certified) {
    rec.alpha_opt = v[0].a;
    rec.phi0_opt = v[0].p;
    rec.metric_value = v[0].s.value;
    rec.metric_error = v[0].s.error;
    rec.converged = true;
  } else {
    rec.alpha_opt = start.alpha;
    rec.phi0_opt = start.phi0;
    rec.metric_value = start.value;
    rec.metric_error = start.error;
    rec.converged = false;
  }
  try {
    rec.k0_at_opt = k0_factor(spec.point(xi, rec.alpha_opt, rec.phi0_opt), spec.indices, spec.poling, fine).value;
  } catch (const Error&) {
    rec.k0_at_opt = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

/// One optimum per xi in spec.xi_values, in order.
inline std::vector<OptimumRecord> xi_curve(const SweepSpec& spec, const SimplexOptions& simplex = {}) {
  spec.validate();
  std::vector<OptimumRecord> out;
  out.reserve(spec.xi_values.size());
  for (double xi : spec.xi_values) out.push_back(maximize_at_xi(spec, xi, simplex));
  return out;
}

/// Location of the maximum of a sampled xi curve: a parabola in log(xi)
/// through the best sample and its neighbours. Falls back to the best
/// sample at either end of the curve.
inline double interpolated_argmax(const std::vector<OptimumRecord>& curve) {
  if (curve.empty()) throw Error(ErrorCode::kInvalidArgument, "empty curve");
  std::size_t b = 0;
  for (std::size_t k = 1; k < curve.size(); ++k) {
    if (curve[k].metric_value > curve[b].metric_value) b = k;
  }
  if (b == 0 || b + 1 == curve.size()) return curve[b].xi;
  const double x0 = std::log(curve[b - 1].xi), x1 = std::log(curve[b].xi), x2 = std::log(curve[b + 1].xi);
  const double y0 = curve[b - 1].metric_value, y1 = curve[b].metric_value, y2 = curve[b + 1].metric_value;
  const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
  const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
  if (den == 0.0) return curve[b].xi;
  const double x = std::clamp(x1 - 0.5 * num / den, x0, x2);
  return std::exp(x);
}

struct SpectralPoint {
  double delta = 0.0;
  double omega2_factor = 0.0;
};

inline std::vector<SpectralPoint> spectral_curve(const std::vector<double>& deltas) {
  std::vector<SpectralPoint> out;
  out.reserve(deltas.size());
  for (double d : deltas) out.push_back({d, omega2_factor_gaussian(d)});
  return out;
}

}  // namespace spdc
