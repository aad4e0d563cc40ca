#pragma once

// Spectral transmission factors.
//
// Frequency conventions: f~(w) = int dt e^{iwt} f(t), inverse with dw/2pi.
// A pump envelope is normalized when int dw/2pi |T~(w)|^2 = 1.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/mathkit.hpp"

namespace spdc {

inline constexpr double kLn2 = std::numbers::ln2;

/// Relative pump bandwidth 4 ln2 / (dt_p dw_F).
inline double relative_pump_bandwidth(double pulse_fwhm_s, double filter_fwhm_rad_s) {
  if (!(pulse_fwhm_s > 0.0) || !(filter_fwhm_rad_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "pulse and filter widths must be positive");
  }
  return 4.0 * kLn2 / (pulse_fwhm_s * filter_fwhm_rad_s);
}

/// Spectral intensity FWHM (rad/s) of a Gaussian pulse with intensity FWHM dt.
inline double pump_spectral_fwhm(double pulse_fwhm_s) { return 4.0 * kLn2 / pulse_fwhm_s; }

// Gaussian envelopes, each normalized to unit L2 norm in its own domain.
namespace envelope {

inline double pump_temporal(double t, double dt) {
  return std::pow(4.0 * kLn2 / (math::kPi * dt * dt), 0.25) * std::exp(-2.0 * kLn2 * t * t / (dt * dt));
}

inline double pump_spectral(double w, double dt) {
  return std::pow(math::kPi * dt * dt / kLn2, 0.25) * std::exp(-w * w * dt * dt / (8.0 * kLn2));
}

inline double filter_amplitude(double w, double dw) { return std::exp(-2.0 * kLn2 * w * w / (dw * dw)); }

inline double pump_transverse(double rho, double w0) {
  return std::sqrt(2.0 / (math::kPi * w0 * w0)) * std::exp(-rho * rho / (w0 * w0));
}

inline double pump_transverse_spectral(double kappa, double w0) {
  return std::sqrt(2.0 * math::kPi * w0 * w0) * std::exp(-kappa * kappa * w0 * w0 / 4.0);
}

}  // namespace envelope

/// Pump envelope or filter transmission. `intensity` returns |shape|^2 with
/// unit peak.
struct SpectralShape {
  enum class Kind { GaussianAnalytic, Tabulated };

  Kind kind = Kind::GaussianAnalytic;
  double fwhm = 1.0;                               // intensity FWHM, rad/s (Gaussian)
  std::vector<std::pair<double, double>> grid;     // (detuning rad/s, amplitude) (tabulated)

  static SpectralShape gaussian(double fwhm) { return {Kind::GaussianAnalytic, fwhm, {}}; }

  static SpectralShape tabulated(std::vector<std::pair<double, double>> samples) {
    SpectralShape s{Kind::Tabulated, 0.0, std::move(samples)};
    s.validate();
    s.fwhm = s.measured_fwhm();
    return s;
  }

  void validate() const {
    if (kind == Kind::GaussianAnalytic) {
      if (!std::isfinite(fwhm) || !(fwhm > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "Gaussian FWHM must be positive");
      }
      return;
    }
    if (grid.size() < 2) throw Error(ErrorCode::kInsufficientTabulation, "need at least two samples");
    double peak = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto [w, a] = grid[k];
      if (!std::isfinite(w) || !(a >= 0.0 && a <= 1.0)) {
        throw Error(ErrorCode::kInvalidArgument, "tabulated amplitudes must lie in [0, 1]");
      }
      if (k > 0 && !(w > grid[k - 1].first)) {
        throw Error(ErrorCode::kInvalidArgument, "tabulated detunings must be strictly increasing");
      }
      peak = std::max(peak, a);
    }
    if (std::abs(peak - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument, "tabulated shape must peak at 1");
    }
  }

  double intensity(double w) const {
    if (kind == Kind::GaussianAnalytic) return std::exp(-4.0 * kLn2 * w * w / (fwhm * fwhm));
    if (w < grid.front().first || w > grid.back().first) return 0.0;
    const auto hi = std::upper_bound(grid.begin(), grid.end(), w,
                                     [](double x, const auto& p) { return x < p.first; });
    if (hi == grid.end()) return grid.back().second * grid.back().second;
    const auto lo = hi - 1;
    const double t = (w - lo->first) / (hi->first - lo->first);
    const double i0 = lo->second * lo->second, i1 = hi->second * hi->second;
    return i0 + t * (i1 - i0);
  }

  // Interval outside which the intensity is zero (or below 1e-16).
  std::pair<double, double> support() const {
    if (kind == Kind::GaussianAnalytic) {
      const double h = fwhm * std::sqrt(std::log(1e16) / (4.0 * kLn2));
      return {-h, h};
    }
    return {grid.front().first, grid.back().first};
  }

  // Distance between the outermost half-intensity crossings.
  double measured_fwhm() const {
    if (kind == Kind::GaussianAnalytic) return fwhm;
    auto crossing = [&](std::size_t a, std::size_t b) {
      const double ia = grid[a].second * grid[a].second, ib = grid[b].second * grid[b].second;
      return grid[a].first + (0.5 - ia) / (ib - ia) * (grid[b].first - grid[a].first);
    };
    double left = grid.front().first, right = grid.back().first;
    for (std::size_t k = 1; k < grid.size(); ++k) {
      if (grid[k - 1].second * grid[k - 1].second < 0.5 && grid[k].second * grid[k].second >= 0.5) {
        left = crossing(k - 1, k);
        break;
      }
    }
    for (std::size_t k = grid.size() - 1; k > 0; --k) {
      if (grid[k].second * grid[k].second < 0.5 && grid[k - 1].second * grid[k - 1].second >= 0.5) {
        right = crossing(k - 1, k);
        break;
      }
    }
    return right - left;
  }

  void require_coverage() const {
    validate();
    if (kind != Kind::Tabulated) return;
    const double span = grid.back().first - grid.front().first;
    if (span < 5.0 * measured_fwhm()) {
      throw Error(ErrorCode::kInsufficientTabulation,
                  "grid spans " + std::to_string(span) + " rad/s, less than 5 FWHM");
    }
  }

  bool operator==(const SpectralShape&) const = default;
};

struct SpectralConfig {
  SpectralShape pump_envelope;   // |T~_p|^2 shape
  SpectralShape filter_signal;
  SpectralShape filter_idler;
  double pump_detuning = 0.0;    // w_s0 + w_i0 - w_p0, rad/s
};

namespace detail {

inline constexpr double kSpectralRelTol = 1e-11;

template <class F>
double integrate_line(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  const math::CubatureOptions opts{kSpectralRelTol, 1e-300, 2'000'000};
  return math::integrate_cubature([&](const std::array<double, 1>& x) { return f(x[0]); },
                                  math::Region<1>{{a}, {b}}, opts)
      .value.real();
}

}  // namespace detail

/// Omega_2 / dw_F for Gaussian pump and identical Gaussian filters.
inline double omega2_factor_gaussian(double delta) {
  if (std::isnan(delta)) throw Error(ErrorCode::kInvalidArgument, "delta is NaN");
  if (delta < 0.0) throw Error(ErrorCode::kNegativeDelta, "delta = " + std::to_string(delta));
  return std::sqrt((math::kPi / (8.0 * kLn2)) / (1.0 + 0.5 * delta * delta));
}

/// Omega_1 = int dw/2pi |F(w)|^2, in rad/s.
inline double omega1_factor(const SpectralShape& filter) {
  filter.require_coverage();
  if (filter.kind == SpectralShape::Kind::GaussianAnalytic) {
    return filter.fwhm * std::sqrt(math::kPi / (4.0 * kLn2)) / math::kTwoPi;
  }
  double total = 0.0;
  for (std::size_t k = 1; k < filter.grid.size(); ++k) {
    total += detail::integrate_line([&](double w) { return filter.intensity(w); },
                                    filter.grid[k - 1].first, filter.grid[k].first);
  }
  return total / math::kTwoPi;
}

/// Omega_2 in rad/s: the pump spectral density, normalized to unit weight
/// under dw/2pi, convolved with both filter intensities and evaluated at the
/// pump detuning. Normalized so that Gaussian shapes give
/// dw_F * omega2_factor_gaussian(delta).
inline double omega_convolution_general(const SpectralConfig& config) {
  const SpectralShape& pump = config.pump_envelope;
  const SpectralShape& fs = config.filter_signal;
  const SpectralShape& fi = config.filter_idler;
  pump.require_coverage();
  fs.require_coverage();
  fi.require_coverage();
  if (!std::isfinite(config.pump_detuning)) {
    throw Error(ErrorCode::kInvalidArgument, "pump detuning must be finite");
  }

  const auto [p_lo, p_hi] = pump.support();
  const auto [s_lo, s_hi] = fs.support();
  const auto [i_lo, i_hi] = fi.support();
  const double shift = config.pump_detuning;

  const double pump_weight =
      detail::integrate_line([&](double u) { return pump.intensity(u); }, p_lo, p_hi) / math::kTwoPi;

  // Pair density at total detuning u: signal x, idler u - shift - x.
  auto pair = [&](double u) {
    const double lo = std::max(s_lo, u - shift - i_hi);
    const double hi = std::min(s_hi, u - shift - i_lo);
    return detail::integrate_line([&](double x) { return fs.intensity(x) * fi.intensity(u - shift - x); },
                                  lo, hi);
  };
  const double total =
      detail::integrate_line([&](double u) { return pump.intensity(u) * pair(u); }, p_lo, p_hi);
  return total / math::kTwoPi / pump_weight;
}

}  // namespace spdc
