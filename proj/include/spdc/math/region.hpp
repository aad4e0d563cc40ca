#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>

#include "spdc/error.hpp"

namespace spdc::math {

// Result of an integration. `converged` is false when the evaluation budget
// ran out before the requested tolerance was met; the estimate and its error
// bound are still meaningful.
struct IntegralEstimate {
  std::complex<double> value{};
  double abs_error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

// Axis-aligned box of dimension 1..4.
template <std::size_t N>
struct Region {
  static_assert(N >= 1 && N <= 4, "regions are 1 to 4 dimensional");

  std::array<double, N> lower{};
  std::array<double, N> upper{};

  static constexpr std::size_t dimension() { return N; }

  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < N; ++i) v *= upper[i] - lower[i];
    return v;
  }

  void validate() const {
    for (std::size_t i = 0; i < N; ++i) {
      if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(lower[i] < upper[i])) {
        throw Error(ErrorCode::kInvalidRegion,
                    "axis " + std::to_string(i) + " has bounds [" + std::to_string(lower[i]) +
                        ", " + std::to_string(upper[i]) + "]");
      }
    }
  }
};

}  // namespace spdc::math
