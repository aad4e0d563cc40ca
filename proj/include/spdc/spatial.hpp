#pragma once

// Spatial overlap factors K0, K1, K2 (all normalized by k_p0 L).
//
// Transverse wavevectors are scaled as phi = (w0 / 2) kappa. The 4D
// integrals over (phi_s, phi_i) are taken in the rotated pair
// u = (phi_s + phi_i)/sqrt2, v = (phi_s - phi_i)/sqrt2, where the Gaussian
// factors separate and, for symmetric indices, the sinc depends on |v| only.
// Cylindrical symmetry then reduces them to (|u|, |v|, dtheta). The
// integrands depend on dtheta only through cos(dtheta), so the angle runs
// over [0, pi] and the result is doubled.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <utility>
#include <string>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/mathkit.hpp"

namespace spdc {

struct GeometryPoint {
  double xi = 1.0;     // L / (2 z_R)
  double alpha = 1.0;  // target waist / pump waist
  double zeta = 0.0;   // collection plane offset / L
  double phi0 = 0.0;   // collinear phase mismatch times L
  double d = 0.0;      // relative detuning from degeneracy

  void validate() const {
    if (!std::isfinite(xi) || !(xi > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "xi must be positive, got " + std::to_string(xi));
    }
    if (!std::isfinite(alpha) || !(alpha > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "alpha must be positive, got " + std::to_string(alpha));
    }
    if (!std::isfinite(zeta) || !std::isfinite(phi0)) {
      throw Error(ErrorCode::kInvalidArgument, "zeta and phi0 must be finite");
    }
    if (!(std::abs(d) <= 0.1)) {
      throw Error(ErrorCode::kInvalidArgument, "|d| must not exceed 0.1, got " + std::to_string(d));
    }
  }

  bool operator==(const GeometryPoint&) const = default;
};

struct OpticalIndices {
  double np_over_ns = 1.0;
  double np_over_ni = 1.0;
  double np_over_nps = 1.0;  // n_p / n'_s
  double np_over_npi = 1.0;  // n_p / n'_i

  static OpticalIndices uniform(double ratio) { return {ratio, ratio, ratio, ratio}; }

  void validate() const {
    for (double r : {np_over_ns, np_over_ni, np_over_nps, np_over_npi}) {
      if (!std::isfinite(r) || !(r > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "index ratios must be finite and positive");
      }
    }
  }

  bool operator==(const OpticalIndices&) const = default;
};

struct PolingTerm {
  int delta_m = 0;
  double r = 1.0;

  bool operator==(const PolingTerm&) const = default;
};

// Fourier coefficients of the poling pattern relative to the phase-matched
// order, which carries r = 1.
class PolingSeries {
 public:
  PolingSeries() : terms_{{0, 1.0}} {}

  explicit PolingSeries(std::vector<PolingTerm> terms) : terms_(std::move(terms)) {
    std::sort(terms_.begin(), terms_.end(),
              [](const PolingTerm& a, const PolingTerm& b) { return a.delta_m < b.delta_m; });
    int zero_terms = 0;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (!std::isfinite(terms_[i].r)) {
        throw Error(ErrorCode::kInvalidArgument, "poling coefficients must be finite");
      }
      if (i > 0 && terms_[i].delta_m == terms_[i - 1].delta_m) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate poling order " + std::to_string(terms_[i].delta_m));
      }
      if (terms_[i].delta_m == 0) {
        ++zero_terms;
        if (terms_[i].r != 1.0) {
          throw Error(ErrorCode::kInvalidArgument, "phase-matched poling term must have r = 1");
        }
      }
    }
    if (zero_terms != 1) {
      throw Error(ErrorCode::kInvalidArgument, "poling series needs exactly one term with delta_m = 0");
    }
  }

  const std::vector<PolingTerm>& terms() const { return terms_; }
  bool single() const { return terms_.size() == 1; }

  bool operator==(const PolingSeries&) const = default;

 private:
  std::vector<PolingTerm> terms_;
};

struct KValue {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  std::size_t evaluations = 0;
};

struct KFactors {
  KValue k0;
  KValue k1;
  KValue k2;
};

enum class KFactor { K0, K1, K2 };

inline constexpr double kTruncationEpsilon = 1e-10;

namespace detail {

// Precomputed sinc argument: sum_m r_m sinc(offset_m + xi (s2 - cs us - ci ui)).
class PhaseMatch {
 public:
  PhaseMatch(const GeometryPoint& p, const OpticalIndices& n, const PolingSeries& poling)
      : xi_(p.xi),
        cs_(2.0 * n.np_over_ns * (1.0 - p.d)),
        ci_(2.0 * n.np_over_ni * (1.0 + p.d)) {
    for (const PolingTerm& t : poling.terms()) {
      offsets_.push_back(0.5 * p.phi0 + math::kPi * t.delta_m);
      weights_.push_back(t.r);
    }
  }

  double operator()(double s2, double us, double ui) const {
    const double shift = xi_ * (s2 - cs_ * us - ci_ * ui);
    double sum = 0.0;
    for (std::size_t m = 0; m < offsets_.size(); ++m) sum += weights_[m] * math::sinc(offsets_[m] + shift);
    return sum;
  }

 private:
  double xi_, cs_, ci_;
  std::vector<double> offsets_;
  std::vector<double> weights_;
};

// Radius beyond which exp(-rate * rho^2) < eps.
inline double gaussian_cutoff(double rate, double eps) {
  return std::sqrt(std::log(1.0 / eps) / rate);
}

inline void check_epsilon(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw Error(ErrorCode::kInvalidEpsilon, "epsilon must lie in (0, 1), got " + std::to_string(eps));
  }
}

// Squared moduli entering the integrands, from the sum/difference polar
// coordinates u = (phi_s + phi_i)/sqrt2, v = (phi_s - phi_i)/sqrt2.
struct PairModuli {
  double us;  // |phi_s|^2
  double ui;  // |phi_i|^2
  double s2;  // |phi_s + phi_i|^2

  PairModuli(double ru, double rv, double cos_theta) {
    const double half = 0.5 * (ru * ru + rv * rv);
    const double cross = ru * rv * cos_theta;
    us = half + cross;
    ui = half - cross;
    s2 = 2.0 * ru * ru;
  }
};

struct Radii {
  double u;
  double v;
};

inline Radii k2_radii(double alpha) {
  const double a2 = alpha * alpha;
  return {gaussian_cutoff(2.0 + a2, kTruncationEpsilon), gaussian_cutoff(a2, kTruncationEpsilon)};
}

// The difference coordinate is only bounded by the sinc; cut where its
// envelope has dropped below 1/(40 pi), and never beyond 25.
inline Radii k0_radii(const GeometryPoint& p, const OpticalIndices& n) {
  const double ratio = std::min(n.np_over_ns * (1.0 - p.d), n.np_over_ni * (1.0 + p.d));
  return {gaussian_cutoff(4.0, kTruncationEpsilon),
          std::min(25.0, std::sqrt(20.0 * math::kPi / (p.xi * ratio)))};
}

inline double k1_idler_radius(double alpha) {
  const double a2 = alpha * alpha;
  return gaussian_cutoff(2.0 * a2 / (1.0 + a2), kTruncationEpsilon);
}

// In w = phi_s - phi_i the signal-plane Gaussian sits at distance
// rho_i (2 + a^2)/(1 + a^2) from the origin with rate 1 + a^2.
inline std::pair<double, double> k1_signal_annulus(double alpha, double rho_i) {
  const double a2 = alpha * alpha;
  const double center = rho_i * (2.0 + a2) / (1.0 + a2);
  const double half = gaussian_cutoff(1.0 + a2, kTruncationEpsilon);
  return {std::max(0.0, center - half), center + half};
}

inline double k2_prefactor(const GeometryPoint& p) {
  const double a2 = p.alpha * p.alpha;
  return 8.0 / std::pow(math::kPi, 5) * p.xi * a2 * a2;
}

inline double k1_prefactor(const GeometryPoint& p) {
  return 4.0 / std::pow(math::kPi, 4) * p.xi * p.alpha * p.alpha;
}

inline double k0_prefactor(const GeometryPoint& p) { return 2.0 / std::pow(math::kPi, 3) * p.xi; }

inline void validate_inputs(const GeometryPoint& p, const OpticalIndices& n) {
  p.validate();
  n.validate();
}

}  // namespace detail

/// Coherent sum over poling orders of the longitudinal sinc factor.
inline double phasematch_sum(const GeometryPoint& point, const OpticalIndices& indices,
                             const PolingSeries& poling, double s2, double u_s, double u_i) {
  return detail::PhaseMatch(point, indices, poling)(s2, u_s, u_i);
}

/// Radius where exp(-(1 + alpha^2) rho^2) falls to epsilon. alpha = 0 is
/// accepted for callers that only need the unit-rate cutoff.
inline double truncation_radius(double alpha, double epsilon) {
  detail::check_epsilon(epsilon);
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be nonnegative");
  }
  return detail::gaussian_cutoff(1.0 + alpha * alpha, epsilon);
}

/// Both photons coupled into the target mode.
inline KValue k2_factor(const GeometryPoint& point, const OpticalIndices& indices = {},
                        const PolingSeries& poling = {}, const math::CubatureOptions& options = {}) {
  detail::validate_inputs(point, indices);
  const detail::PhaseMatch pm(point, indices, poling);
  const double a2 = point.alpha * point.alpha;
  const double ks = 4.0 * point.xi * point.zeta * indices.np_over_nps;
  const double ki = 4.0 * point.xi * point.zeta * indices.np_over_npi;
  const bool phased = point.zeta != 0.0;

  auto integrand = [&](const std::array<double, 3>& x) -> std::complex<double> {
    const double ru = x[0], rv = x[1];
    const detail::PairModuli m(ru, rv, std::cos(x[2]));
    const double amp = ru * rv * std::exp(-(2.0 + a2) * ru * ru - a2 * rv * rv) * pm(m.s2, m.us, m.ui);
    if (!phased) return amp;
    return std::polar(amp, -(ks * m.us + ki * m.ui));
  };

  const auto r = detail::k2_radii(point.alpha);
  const math::Region<3> region{{0.0, 0.0, 0.0}, {r.u, r.v, math::kPi}};
  const auto est = math::integrate_cubature(integrand, region, options);

  // 2 for the folded angle, 2 pi for the common rotation.
  const double scale = 2.0 * math::kTwoPi;
  const double amplitude = scale * std::abs(est.value);
  const double amp_err = scale * est.abs_error;
  const double c = detail::k2_prefactor(point);
  return {c * amplitude * amplitude, c * amp_err * (2.0 * amplitude + amp_err), est.converged,
          est.evaluations};
}

/// Total (unfiltered) spatial factor; independent of alpha and zeta.
inline KValue k0_factor(const GeometryPoint& point, const OpticalIndices& indices = {},
                        const PolingSeries& poling = {}, const math::CubatureOptions& options = {}) {
  detail::validate_inputs(point, indices);
  const detail::PhaseMatch pm(point, indices, poling);

  auto integrand = [&](const std::array<double, 3>& x) -> double {
    const double ru = x[0], rv = x[1];
    const detail::PairModuli m(ru, rv, std::cos(x[2]));
    const double f = pm(m.s2, m.us, m.ui);
    return ru * rv * std::exp(-2.0 * m.s2) * f * f;
  };

  const auto r = detail::k0_radii(point, indices);
  const math::Region<3> region{{0.0, 0.0, 0.0}, {r.u, r.v, math::kPi}};
  const auto est = math::integrate_cubature(integrand, region, options);

  const double scale = 2.0 * math::kTwoPi * detail::k0_prefactor(point);
  return {scale * est.value.real(), scale * est.abs_error, est.converged, est.evaluations};
}

/// Signal photon coupled, idler unrestricted. At each idler radius the
/// signal-plane integral is taken in polar coordinates about the idler
/// wavevector, squared, then integrated over the idler.
inline KValue k1_factor(const GeometryPoint& point, const OpticalIndices& indices = {},
                        const PolingSeries& poling = {}, const math::CubatureOptions& options = {}) {
  detail::validate_inputs(point, indices);
  const detail::PhaseMatch pm(point, indices, poling);
  const double a2 = point.alpha * point.alpha;
  const double ks = 4.0 * point.xi * point.zeta * indices.np_over_nps;
  const bool phased = point.zeta != 0.0;

  std::size_t evaluations = 0;
  auto signal_plane = [&](double ri, const math::CubatureOptions& opts) {
    const double ui = ri * ri;
    auto inner = [&](const std::array<double, 2>& x) -> std::complex<double> {
      const double rw = x[0];
      const double c = rw * ri * std::cos(x[1]);
      const double us = ui + rw * rw + 2.0 * c;
      const double s2 = 4.0 * ui + rw * rw + 4.0 * c;
      const double amp = rw * std::exp(-s2 - a2 * us) * pm(s2, us, ui);
      if (!phased) return amp;
      return std::polar(amp, -ks * us);
    };
    const auto [lo, hi] = detail::k1_signal_annulus(point.alpha, ri);
    const math::Region<2> plane{{lo, 0.0}, {hi, math::kPi}};
    auto est = math::integrate_cubature(inner, plane, opts);
    evaluations += est.evaluations;
    return est;
  };

  // The inner integral collapses quickly with the idler radius once focusing
  // is tight; resolving its tail to abs_tol would dominate the cost. Probe the
  // peak magnitude first and tolerate errors relative to it.
  const double ri_max = detail::k1_idler_radius(point.alpha);
  math::CubatureOptions probe = options;
  probe.rel_tol = std::max(options.rel_tol, 1e-2);
  double peak = 0.0;
  for (int j = 0; j < 8; ++j) {
    peak = std::max(peak, std::abs(signal_plane(ri_max * j / 16.0, probe).value));
  }
  math::CubatureOptions inner_options = options;
  inner_options.abs_tol = std::max(options.abs_tol, 0.1 * options.rel_tol * peak);

  bool inner_converged = true;
  double weighted_sq = 0.0;
  double weighted_err = 0.0;
  auto outer = [&](const std::array<double, 1>& y) -> double {
    const double ri = y[0];
    const auto est = signal_plane(ri, inner_options);
    inner_converged = inner_converged && est.converged;
    const double b = 2.0 * std::abs(est.value);
    const double db = 2.0 * est.abs_error;
    weighted_sq += ri * b * b;
    weighted_err += ri * db * (2.0 * b + db);
    return ri * b * b;
  };

  const math::Region<1> line{{0.0}, {ri_max}};
  const auto est = math::integrate_cubature(outer, line, options);

  const double scale = math::kTwoPi * detail::k1_prefactor(point);
  const double value = scale * est.value.real();
  const double inner_rel = weighted_sq > 0.0 ? weighted_err / weighted_sq : 0.0;
  const double error = scale * est.abs_error + inner_rel * std::abs(value);
  return {value, error, est.converged && inner_converged, evaluations};
}

inline KFactors k_factors(const GeometryPoint& point, const OpticalIndices& indices = {},
                          const PolingSeries& poling = {}, const math::CubatureOptions& options = {}) {
  return {k0_factor(point, indices, poling, options), k1_factor(point, indices, poling, options),
          k2_factor(point, indices, poling, options)};
}

inline constexpr std::size_t kMinOracleSamples = 100'000;

/// Brute-force Monte Carlo estimate of one K-factor over Cartesian
/// wavevectors, with no use of the rotational symmetry. `error` is the
/// one-sigma standard error.
///
/// K2: the complex 4D integral is sampled and |.|^2 is debiased by the
/// variance of the mean. K1: each idler sample is paired with a batch of
/// signal samples whose off-diagonal products give an unbiased |inner|^2.
/// K0: sampled on the same truncated domain as k0_factor.
inline KValue k_oracle_mc(const GeometryPoint& point, const OpticalIndices& indices,
                          const PolingSeries& poling, KFactor which, std::size_t samples,
                          std::uint64_t seed) {
  detail::validate_inputs(point, indices);
  if (samples < kMinOracleSamples) {
    throw Error(ErrorCode::kInvalidArgument, "oracle needs at least 100000 samples");
  }
  const detail::PhaseMatch pm(point, indices, poling);
  const double a2 = point.alpha * point.alpha;
  const double ks = 4.0 * point.xi * point.zeta * indices.np_over_nps;
  const double ki = 4.0 * point.xi * point.zeta * indices.np_over_npi;
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

  // x = (u, v) Cartesian; (phi_s, phi_i) = (u + v, u - v)/sqrt2 has unit Jacobian.
  struct Cartesian {
    double us, ui, s2;
  };
  auto to_pair = [inv_sqrt2](const std::array<double, 4>& x) {
    const double sx = inv_sqrt2 * (x[0] + x[2]), sy = inv_sqrt2 * (x[1] + x[3]);
    const double ix = inv_sqrt2 * (x[0] - x[2]), iy = inv_sqrt2 * (x[1] - x[3]);
    const double px = sx + ix, py = sy + iy;
    return Cartesian{sx * sx + sy * sy, ix * ix + iy * iy, px * px + py * py};
  };

  switch (which) {
    case KFactor::K2: {
      const auto r = detail::k2_radii(point.alpha);
      auto f = [&](const std::array<double, 4>& x) -> std::complex<double> {
        const Cartesian c = to_pair(x);
        const double amp = std::exp(-c.s2 - a2 * (c.us + c.ui)) * pm(c.s2, c.us, c.ui);
        return std::polar(amp, -(ks * c.us + ki * c.ui));
      };
      const math::Region<4> box{{-r.u, -r.u, -r.v, -r.v}, {r.u, r.u, r.v, r.v}};
      const auto est = math::integrate_mc(f, box, samples, seed);
      const double c = detail::k2_prefactor(point);
      const double mag = std::abs(est.value);
      const double debiased = mag * mag - (est.var_re + est.var_im);
      double proj_var = 0.5 * (est.var_re + est.var_im);
      if (mag > 0.0) {
        const double cr = est.value.real() / mag, ci = est.value.imag() / mag;
        proj_var = cr * cr * est.var_re + ci * ci * est.var_im + 2.0 * cr * ci * est.cov;
      }
      return {c * debiased, c * 2.0 * mag * std::sqrt(std::max(proj_var, 0.0)), true, samples};
    }
    case KFactor::K0: {
      const auto r = detail::k0_radii(point, indices);
      const double rv2 = r.v * r.v;
      auto f = [&](const std::array<double, 4>& x) -> double {
        if (x[2] * x[2] + x[3] * x[3] > rv2) return 0.0;
        const Cartesian c = to_pair(x);
        const double g = pm(c.s2, c.us, c.ui);
        return std::exp(-2.0 * c.s2) * g * g;
      };
      const math::Region<4> box{{-r.u, -r.u, -r.v, -r.v}, {r.u, r.u, r.v, r.v}};
      const auto est = math::integrate_mc(f, box, samples, seed);
      const double c = detail::k0_prefactor(point);
      return {c * est.value.real(), c * std::sqrt(est.var_re), true, samples};
    }
    case KFactor::K1: {
      constexpr std::size_t batch = 32;
      const std::size_t outer_samples = samples / batch;
      const double ri_max = detail::k1_idler_radius(point.alpha);
      const double half_s = detail::gaussian_cutoff(1.0 + a2, kTruncationEpsilon);
      const double area_i = 4.0 * ri_max * ri_max;
      const double area_s = 4.0 * half_s * half_s;
      const math::CounterRng rng(seed);

      math::ComplexAccumulator acc;
      for (std::size_t j = 0; j < outer_samples; ++j) {
        const std::uint64_t base = static_cast<std::uint64_t>(j) * (batch + 1) * 2;
        const double ix = ri_max * (2.0 * rng.uniform(base) - 1.0);
        const double iy = ri_max * (2.0 * rng.uniform(base + 1) - 1.0);
        const double ui = ix * ix + iy * iy;
        if (ui > ri_max * ri_max) {
          acc.add(0.0);
          continue;
        }
        // Signal box centred on the Gaussian peak at -phi_i/(1 + a^2).
        const double cx = -ix / (1.0 + a2), cy = -iy / (1.0 + a2);
        std::complex<double> sum{};
        double sum_sq = 0.0;
        for (std::size_t l = 0; l < batch; ++l) {
          const std::uint64_t c = base + 2 * (l + 1);
          const double sx = cx + half_s * (2.0 * rng.uniform(c) - 1.0);
          const double sy = cy + half_s * (2.0 * rng.uniform(c + 1) - 1.0);
          const double us = sx * sx + sy * sy;
          const double px = sx + ix, py = sy + iy;
          const double s2 = px * px + py * py;
          const std::complex<double> z =
              area_s * std::polar(std::exp(-s2 - a2 * us) * pm(s2, us, ui), -ks * us);
          sum += z;
          sum_sq += std::norm(z);
        }
        const double pair_mean = (std::norm(sum) - sum_sq) / static_cast<double>(batch * (batch - 1));
        acc.add(area_i * pair_mean);
      }
      const double c = detail::k1_prefactor(point);
      const double n = static_cast<double>(outer_samples);
      return {c * acc.mean().real(), c * std::sqrt(acc.var_re() / n), true, outer_samples * batch};
    }
  }
  return {};
}

}  // namespace spdc
