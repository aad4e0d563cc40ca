#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "spdc/spectral.hpp"

using namespace spdc;

namespace {

constexpr double kFilter = math::kTwoPi * 75e9;

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIoError;
}

SpectralConfig gaussian_config(double delta, double dw = kFilter, double detuning = 0.0) {
  const auto f = SpectralShape::gaussian(dw);
  return {SpectralShape::gaussian(delta * dw), f, f, detuning};
}

// Rectangular filter as a tabulated shape with steep edges.
SpectralShape box(double width, double span) {
  const double edge = width * 1e-9;
  return SpectralShape::tabulated({{-span / 2, 0.0},
                                   {-width / 2 - edge, 0.0},
                                   {-width / 2 + edge, 1.0},
                                   {width / 2 - edge, 1.0},
                                   {width / 2 + edge, 0.0},
                                   {span / 2, 0.0}});
}

}  // namespace

TEST(Omega2Gaussian, Monochromatic) {
  EXPECT_NEAR(omega2_factor_gaussian(0.0), 0.7526928, 1e-6);
  EXPECT_NEAR(omega2_factor_gaussian(0.0), 0.752691848, 1e-9);
}

TEST(Omega2Gaussian, RootTwo) {
  EXPECT_NEAR(omega2_factor_gaussian(std::numbers::sqrt2), 0.5322336, 1e-7);
  EXPECT_NEAR(omega2_factor_gaussian(std::numbers::sqrt2), omega2_factor_gaussian(0.0) / std::numbers::sqrt2, 1e-12);
}

TEST(Omega2Gaussian, BroadPump) {
  EXPECT_NEAR(omega2_factor_gaussian(10.0), 0.1053979, 1e-7);
  EXPECT_NEAR(omega2_factor_gaussian(10.0), omega_convolution_general(gaussian_config(10.0)) / kFilter, 1e-4);
}

TEST(Omega2Gaussian, MatchesTripleGaussianOracle) {
  for (double d : {0.0, 0.3, 1.0, 2.5, 7.0}) {
    EXPECT_NEAR(omega2_factor_gaussian(d), oracle::omega2_gaussian_convolution(d), 1e-12) << d;
  }
}

TEST(Omega2Gaussian, StrictlyDecreasing) {
  double prev = omega2_factor_gaussian(0.0);
  for (double d = 0.1; d < 5.0; d += 0.1) {
    const double v = omega2_factor_gaussian(d);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Omega2Gaussian, Errors) {
  EXPECT_EQ(code_of([] { omega2_factor_gaussian(-0.1); }), ErrorCode::kNegativeDelta);
  EXPECT_EQ(code_of([] { omega2_factor_gaussian(NAN); }), ErrorCode::kInvalidArgument);
}

TEST(RelativeBandwidth, PaperSource) {
  const double delta = relative_pump_bandwidth(25e-9, kFilter);
  EXPECT_NEAR(delta, 4.0 * std::numbers::ln2 / (25e-9 * kFilter), 1e-18);
  EXPECT_NEAR(delta, 2.3534e-4, 1e-8);
}

TEST(OmegaConvolution, GaussianMatchesClosedForm) {
  for (double d : {0.0, 1e-3, 0.5, 1.0, 3.0}) {
    const double got = omega_convolution_general(gaussian_config(std::max(d, 1e-12)));
    EXPECT_NEAR(got / kFilter, omega2_factor_gaussian(d), 1e-8) << d;
  }
}

TEST(OmegaConvolution, PaperFilterNearMonochromatic) {
  const double got = omega_convolution_general(gaussian_config(relative_pump_bandwidth(25e-9, kFilter)));
  EXPECT_NEAR(got, kFilter * 0.7526928, kFilter * 1e-6);
}

TEST(OmegaConvolution, DetunedPumpFallsOff) {
  const double centred = omega_convolution_general(gaussian_config(0.5));
  const double detuned = omega_convolution_general(gaussian_config(0.5, kFilter, 3.0 * kFilter));
  EXPECT_LT(detuned / centred, 0.05);
  // Convolution of Gaussians stays Gaussian in the detuning.
  const double var = (1.0 / (4.0 * kLn2)) + 0.25 / (8.0 * kLn2);
  EXPECT_NEAR(detuned / centred, std::exp(-9.0 / (2.0 * var)), 1e-9);
}

TEST(OmegaConvolution, MonochromaticLimitIsFourthPowerIntegral) {
  // A very narrow pump picks out int dw |F(w)|^2 |F(-w)|^2.
  const auto f = SpectralShape::gaussian(kFilter);
  const double fourth = detail::integrate_line([&](double w) { return f.intensity(w) * f.intensity(-w); },
                                               -5.0 * kFilter, 5.0 * kFilter);
  const double got = omega_convolution_general({SpectralShape::gaussian(1e-6 * kFilter), f, f, 0.0});
  EXPECT_NEAR(got / fourth, 1.0, 1e-9);
}

TEST(OmegaConvolution, TabulatedGaussianAgreesWithAnalytic) {
  std::vector<std::pair<double, double>> grid;
  for (int k = -400; k <= 400; ++k) {
    const double w = k * 0.01;
    grid.push_back({w, std::exp(-2.0 * kLn2 * w * w)});
  }
  const auto tab = SpectralShape::tabulated(grid);
  EXPECT_NEAR(tab.measured_fwhm(), 1.0, 1e-3);
  const auto gauss = SpectralShape::gaussian(1.0);
  const double analytic = omega_convolution_general({SpectralShape::gaussian(0.5), gauss, gauss, 0.0});
  const double tabulated = omega_convolution_general({SpectralShape::gaussian(0.5), tab, tab, 0.0});
  EXPECT_NEAR(tabulated / analytic, 1.0, 1e-4);
}

TEST(OmegaConvolution, Omega1BoundsOmega2) {
  // A pair needs both photons through their filters; a single needs one.
  for (double d : {0.0, 0.5, 2.0}) {
    const auto c = gaussian_config(std::max(d, 1e-9));
    EXPECT_LE(omega_convolution_general(c), math::kTwoPi * omega1_factor(c.filter_signal));
  }
}

TEST(Omega1, Gaussian) {
  EXPECT_NEAR(omega1_factor(SpectralShape::gaussian(kFilter)) / kFilter, 0.16941519, 1e-8);
  EXPECT_NEAR(omega1_factor(SpectralShape::gaussian(1.0)), std::sqrt(math::kPi / (4.0 * kLn2)) / math::kTwoPi, 1e-15);
}

TEST(Omega1, RectangularFilter) {
  EXPECT_NEAR(omega1_factor(box(2.0, 12.0)), 2.0 / math::kTwoPi, 1e-8);
}

TEST(Omega1, LinearInBandwidth) {
  EXPECT_NEAR(omega1_factor(SpectralShape::gaussian(2.0 * kFilter)), 2.0 * omega1_factor(SpectralShape::gaussian(kFilter)),
              1e-6);
  EXPECT_NEAR(omega1_factor(box(4.0, 24.0)), 2.0 * omega1_factor(box(2.0, 12.0)), 1e-8);
}

TEST(SpectralShape, TabulationMustCoverFiveWidths) {
  EXPECT_EQ(code_of([] { omega1_factor(box(2.0, 8.0)); }), ErrorCode::kInsufficientTabulation);
  EXPECT_EQ(code_of([] { SpectralShape::tabulated({{0.0, 1.0}}); }), ErrorCode::kInsufficientTabulation);
}

TEST(SpectralShape, Validation) {
  EXPECT_EQ(code_of([] { SpectralShape::tabulated({{0.0, 1.0}, {1.0, 1.5}}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { SpectralShape::tabulated({{0.0, 1.0}, {0.0, 0.5}}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { SpectralShape::tabulated({{0.0, 0.5}, {1.0, 0.5}}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { SpectralShape::gaussian(0.0).validate(); }), ErrorCode::kInvalidArgument);
}

TEST(SpectralShape, LinearInIntensityAndZeroOutside) {
  const auto s = SpectralShape::tabulated({{-1.0, 0.0}, {0.0, 1.0}, {1.0, std::sqrt(0.5)}});
  EXPECT_NEAR(s.intensity(0.5), 0.75, 1e-15);
  EXPECT_NEAR(s.intensity(-0.5), 0.5, 1e-15);
  EXPECT_EQ(s.intensity(1.5), 0.0);
  EXPECT_EQ(s.intensity(-2.0), 0.0);
}
