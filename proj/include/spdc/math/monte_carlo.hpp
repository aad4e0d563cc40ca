#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>

#include "spdc/error.hpp"
#include "spdc/math/region.hpp"

namespace spdc::math {

// Counter-based generator: the i-th draw is a pure function of (seed, i),
// so any sample can be regenerated without replaying the stream.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x6a09e667f3bcc909ULL)) {}

  std::uint64_t bits(std::uint64_t counter) const {
    return mix(key_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
};

// Running mean and (co)variance of complex samples.
class ComplexAccumulator {
 public:
  void add(std::complex<double> z) {
    ++n_;
    const double dr = z.real() - mean_re_;
    const double di = z.imag() - mean_im_;
    mean_re_ += dr / static_cast<double>(n_);
    mean_im_ += di / static_cast<double>(n_);
    m2_re_ += dr * (z.real() - mean_re_);
    m2_im_ += di * (z.imag() - mean_im_);
    c_ += dr * (z.imag() - mean_im_);
  }

  std::size_t count() const { return n_; }
  std::complex<double> mean() const { return {mean_re_, mean_im_}; }
  double var_re() const { return n_ > 1 ? m2_re_ / static_cast<double>(n_ - 1) : 0.0; }
  double var_im() const { return n_ > 1 ? m2_im_ / static_cast<double>(n_ - 1) : 0.0; }
  double cov() const { return n_ > 1 ? c_ / static_cast<double>(n_ - 1) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_re_ = 0.0, mean_im_ = 0.0;
  double m2_re_ = 0.0, m2_im_ = 0.0, c_ = 0.0;
};

// Monte Carlo estimate. The variance fields describe the sampling
// distribution of `value` itself (already divided by the sample count).
struct McEstimate : IntegralEstimate {
  double var_re = 0.0;
  double var_im = 0.0;
  double cov = 0.0;
};

inline constexpr std::size_t kMinMcSamples = 10'000;

/// Plain Monte Carlo over a box with uniformly distributed points.
/// Coordinate j of sample i uses counter i*N + j.
template <std::size_t N, class F>
McEstimate integrate_mc(F&& f, const Region<N>& region, std::size_t samples, std::uint64_t seed) {
  region.validate();
  if (samples < kMinMcSamples) {
    throw Error(ErrorCode::kInvalidArgument, "Monte Carlo needs at least 10000 samples");
  }
  const CounterRng rng(seed);
  std::array<double, N> width{};
  for (std::size_t j = 0; j < N; ++j) width[j] = region.upper[j] - region.lower[j];

  ComplexAccumulator acc;
  std::array<double, N> x{};
  for (std::size_t i = 0; i < samples; ++i) {
    for (std::size_t j = 0; j < N; ++j) {
      x[j] = region.lower[j] + width[j] * rng.uniform(i * N + j);
    }
    acc.add(std::complex<double>(f(x)));
  }

  const double volume = region.volume();
  const double n = static_cast<double>(samples);
  McEstimate out;
  out.value = volume * acc.mean();
  out.var_re = volume * volume * acc.var_re() / n;
  out.var_im = volume * volume * acc.var_im() / n;
  out.cov = volume * volume * acc.cov() / n;
  out.abs_error = std::sqrt(out.var_re + out.var_im);
  out.evaluations = samples;
  return out;
}

}  // namespace spdc::math
