#pragma once

// Absolute pair/single/total probabilities per pump pulse and the coupling
// efficiencies derived from them.

#include <cmath>
#include <string>

#include "spdc/error.hpp"
#include "spdc/spatial.hpp"
#include "spdc/spectral.hpp"

namespace spdc {

inline constexpr double kEpsilon0 = 8.8541878128e-12;  // F/m
inline constexpr double kSpeedOfLight = 299792458.0;    // m/s

/// Dimensional source parameters, SI units throughout.
struct PhysicalSource {
  double pulse_energy = 0.0;      // J
  double chi_eff = 0.0;           // m/V, includes the 2/pi of first-order poling
  double crystal_length = 0.0;    // m
  double poling_period = 0.0;     // m
  double filter_bandwidth = 0.0;  // rad/s, intensity FWHM
  double pump_pulse_fwhm = 0.0;   // s
  double omega_s0 = 0.0;          // rad/s
  double omega_i0 = 0.0;
  double omega_p0 = 0.0;
  double n_p = 1.0;
  double n_s = 1.0;
  double n_i = 1.0;
  double n_prime_s = 1.0;
  double n_prime_i = 1.0;
  double pump_waist = 0.0;        // m

  void validate() const {
    const double positive[] = {pulse_energy, crystal_length, poling_period, filter_bandwidth,
                               pump_pulse_fwhm, omega_s0, omega_i0, omega_p0, n_p, n_s, n_i,
                               n_prime_s, n_prime_i, pump_waist};
    for (double v : positive) {
      if (!std::isfinite(v) || !(v > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "source lengths, energies, frequencies and indices must be positive");
      }
    }
    if (!std::isfinite(chi_eff) || chi_eff < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "chi_eff must be finite and nonnegative");
    }
    if (std::abs(omega_s0 + omega_i0 - omega_p0) > 1e-6 * omega_p0) {
      throw Error(ErrorCode::kInvalidArgument, "signal and idler frequencies must add up to the pump");
    }
  }

  double rayleigh_length() const { return n_p * omega_p0 * pump_waist * pump_waist / (2.0 * kSpeedOfLight); }
  double xi() const { return crystal_length / (2.0 * rayleigh_length()); }
  double delta() const { return relative_pump_bandwidth(pump_pulse_fwhm, filter_bandwidth); }

  OpticalIndices indices() const { return {n_p / n_s, n_p / n_i, n_p / n_prime_s, n_p / n_prime_i}; }

  /// E_p chi^2 L dw_F w_s w_i w_p / (8 eps0 c^4 n_s n_i).
  double prefactor() const {
    const double c2 = kSpeedOfLight * kSpeedOfLight;
    return pulse_energy * chi_eff * chi_eff * crystal_length * filter_bandwidth * omega_s0 * omega_i0 *
           omega_p0 / (8.0 * kEpsilon0 * c2 * c2 * n_s * n_i);
  }

  /// Gaussian pump spectrum and identical Gaussian filters at this source's widths.
  SpectralConfig gaussian_spectrum() const {
    return {SpectralShape::gaussian(pump_spectral_fwhm(pump_pulse_fwhm)),
            SpectralShape::gaussian(filter_bandwidth), SpectralShape::gaussian(filter_bandwidth), 0.0};
  }
};

struct Efficiencies {
  double gamma1 = 0.0;   // K1 / K0
  double gamma2 = 0.0;   // K2 / K0
  double gamma21 = 0.0;  // K2 / K1
};

struct FomResult {
  double p0 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma21 = 0.0;
  KFactors k;
  double omega1_over_dwf = 0.0;
  double omega2_over_dwf = 0.0;
  double prefactor = 0.0;
  bool converged = true;
};

inline Efficiencies efficiencies(const KFactors& k) {
  if (!(k.k0.value > k.k0.error) || !(k.k0.value > 0.0)) {
    throw Error(ErrorCode::kDivisionByZeroK, "k0 = " + std::to_string(k.k0.value) + " is not resolved from zero");
  }
  if (!(k.k1.value > k.k1.error) || !(k.k1.value > 0.0)) {
    throw Error(ErrorCode::kDivisionByZeroK, "k1 = " + std::to_string(k.k1.value) + " is not resolved from zero");
  }
  Efficiencies e;
  e.gamma1 = k.k1.value / k.k0.value;
  e.gamma21 = k.k2.value / k.k1.value;
  e.gamma2 = e.gamma21 * e.gamma1;
  return e;
}

/// Omega_1 / dw_F on the same footing as omega2_factor_gaussian, i.e. with
/// the spectral integral taken over dw rather than dw/2pi.
inline double omega1_over_bandwidth(const SpectralShape& filter, double filter_bandwidth) {
  return math::kTwoPi * omega1_factor(filter) / filter_bandwidth;
}

inline double omega2_over_bandwidth(const SpectralConfig& spectral, double filter_bandwidth) {
  return omega_convolution_general(spectral) / filter_bandwidth;
}

inline FomResult absolute_probabilities(const PhysicalSource& phys, const GeometryPoint& point,
                                        const OpticalIndices& indices, const PolingSeries& poling,
                                        const SpectralConfig& spectral,
                                        const math::CubatureOptions& options = {}) {
  phys.validate();
  point.validate();
  const double xi_phys = phys.xi();
  if (std::abs(xi_phys - point.xi) > 0.01 * point.xi) {
    throw Error(ErrorCode::kInconsistentGeometry, "source gives xi = " + std::to_string(xi_phys) +
                                                      ", geometry has xi = " + std::to_string(point.xi));
  }

  FomResult r;
  r.prefactor = phys.prefactor();
  r.k = k_factors(point, indices, poling, options);
  r.omega1_over_dwf = omega1_over_bandwidth(spectral.filter_signal, phys.filter_bandwidth);
  r.omega2_over_dwf = omega2_over_bandwidth(spectral, phys.filter_bandwidth);

  r.p0 = r.prefactor * r.omega2_over_dwf * r.k.k0.value;
  r.p1 = r.prefactor * r.omega1_over_dwf * r.k.k1.value;
  r.p2 = r.prefactor * r.omega2_over_dwf * r.k.k2.value;

  const Efficiencies e = efficiencies(r.k);
  r.gamma1 = e.gamma1;
  r.gamma2 = e.gamma2;
  r.gamma21 = e.gamma21;
  r.converged = r.k.k0.converged && r.k.k1.converged && r.k.k2.converged;
  return r;
}

struct HeraldingEstimate {
  double value = 0.0;
  bool exceeds_unity = false;  // inputs inconsistent; reported, not clamped
};

/// Heralding ratio inferred from measured pair and single probabilities,
/// after accidental subtraction: (Om1/Om2) (P_AB / (T_A T_B)) (T_I / P_I).
inline HeraldingEstimate heralding_from_counts(double p_ab, double p_i, double t_a, double t_b,
                                               double t_i, double omega1, double omega2) {
  if (!(p_ab >= 0.0) || !(p_i > 0.0)) {
    throw Error(ErrorCode::kNonpositiveCounts, "need p_ab >= 0 and p_i > 0");
  }
  for (double t : {t_a, t_b, t_i}) {
    if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "transmissions must lie in (0, 1]");
  }
  if (!(omega1 > 0.0) || !(omega2 > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "spectral factors must be positive");
  }
  HeraldingEstimate h;
  h.value = (omega1 / omega2) * (p_ab / (t_a * t_b)) * (t_i / p_i);
  h.exceeds_unity = h.value > 1.0;
  return h;
}

}  // namespace spdc
