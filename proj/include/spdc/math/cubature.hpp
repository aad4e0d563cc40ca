#pragma once

// Globally adaptive cubature for complex-valued integrands on boxes.
//
// One dimension uses the 7/15-point Gauss-Kronrod pair; two to four
// dimensions use the Genz-Malik degree-7 rule with its embedded degree-5
// rule for error estimation. The box with the largest error estimate is
// bisected along the axis with the largest fourth difference, which is the
// subdivision strategy of the Berntsen-Espelid-Genz family of algorithms.
//
// Real and imaginary parts share one subdivision. Boxes with equal error
// are ordered by creation index, so the sequence of splits (and therefore
// the returned bits) depends only on the inputs.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "spdc/error.hpp"
#include "spdc/math/region.hpp"

namespace spdc::math {

struct CubatureOptions {
  double rel_tol = 1e-4;
  double abs_tol = 1e-12;
  std::size_t max_evals = 5'000'000;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "cubature tolerances must be positive");
    }
    if (max_evals == 0) throw Error(ErrorCode::kInvalidArgument, "max_evals must be positive");
  }
};

namespace detail {

template <std::size_t N>
struct RuleOutput {
  std::complex<double> value;
  double error;
  std::size_t split_axis;
};

template <std::size_t N>
constexpr std::size_t rule_points() {
  if constexpr (N == 1) {
    return 15;
  } else {
    return 1 + 4 * N + 2 * N * (N - 1) + (std::size_t{1} << N);
  }
}

inline double l1_norm(std::complex<double> z) { return std::abs(z.real()) + std::abs(z.imag()); }

template <class F>
RuleOutput<1> gauss_kronrod15(F& f, const std::array<double, 1>& c, const std::array<double, 1>& h) {
  static constexpr std::array<double, 8> xgk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wgk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const std::complex<double> fc = f(std::array<double, 1>{c[0]});
  std::complex<double> kronrod = wgk[7] * fc;
  std::complex<double> gauss = wg[3] * fc;
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = h[0] * xgk[j];
    const std::complex<double> pair =
        std::complex<double>(f(std::array<double, 1>{c[0] - dx})) + std::complex<double>(f(std::array<double, 1>{c[0] + dx}));
    kronrod += wgk[j] * pair;
    if (j % 2 == 1) gauss += wg[j / 2] * pair;
  }
  kronrod *= h[0];
  gauss *= h[0];
  return {kronrod, std::abs(kronrod - gauss), 0};
}

template <std::size_t N, class F>
RuleOutput<N> genz_malik(F& f, const std::array<double, N>& c, const std::array<double, N>& h) {
  static_assert(N >= 2);
  constexpr double n = static_cast<double>(N);
  const double lambda2 = std::sqrt(9.0 / 70.0);
  const double lambda4 = std::sqrt(9.0 / 10.0);
  const double lambda5 = std::sqrt(9.0 / 19.0);
  constexpr double w1 = (12824.0 - 9120.0 * n + 400.0 * n * n) / 19683.0;
  constexpr double w2 = 980.0 / 6561.0;
  constexpr double w3 = (1820.0 - 400.0 * n) / 19683.0;
  constexpr double w4 = 200.0 / 19683.0;
  constexpr double w5 = 6859.0 / 19683.0 / static_cast<double>(std::size_t{1} << N);
  constexpr double e1 = (729.0 - 950.0 * n + 50.0 * n * n) / 729.0;
  constexpr double e2 = 245.0 / 486.0;
  constexpr double e3 = (265.0 - 100.0 * n) / 1458.0;
  constexpr double e4 = 25.0 / 729.0;
  constexpr double ratio = (9.0 / 70.0) / (9.0 / 10.0);

  auto eval = [&f](const std::array<double, N>& x) { return std::complex<double>(f(x)); };

  const std::complex<double> f0 = eval(c);
  std::complex<double> sum2{}, sum3{}, sum4{}, sum5{};
  std::array<double, N> fourth{};
  std::array<double, N> x = c;

  for (std::size_t i = 0; i < N; ++i) {
    x[i] = c[i] - lambda2 * h[i];
    const auto a2 = eval(x);
    x[i] = c[i] + lambda2 * h[i];
    const auto b2 = eval(x);
    x[i] = c[i] - lambda4 * h[i];
    const auto a4 = eval(x);
    x[i] = c[i] + lambda4 * h[i];
    const auto b4 = eval(x);
    x[i] = c[i];
    sum2 += a2 + b2;
    sum3 += a4 + b4;
    fourth[i] = l1_norm((a2 + b2 - 2.0 * f0) - ratio * (a4 + b4 - 2.0 * f0));
  }

  for (std::size_t i = 0; i + 1 < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j) {
      for (int si : {-1, 1}) {
        for (int sj : {-1, 1}) {
          x[i] = c[i] + si * lambda4 * h[i];
          x[j] = c[j] + sj * lambda4 * h[j];
          sum4 += eval(x);
        }
      }
      x[i] = c[i];
      x[j] = c[j];
    }
  }

  for (std::size_t mask = 0; mask < (std::size_t{1} << N); ++mask) {
    for (std::size_t k = 0; k < N; ++k) {
      x[k] = c[k] + ((mask >> k) & 1U ? lambda5 : -lambda5) * h[k];
    }
    sum5 += eval(x);
  }

  double volume = 1.0;
  for (std::size_t k = 0; k < N; ++k) volume *= 2.0 * h[k];

  const std::complex<double> deg7 = volume * (w1 * f0 + w2 * sum2 + w3 * sum3 + w4 * sum4 + w5 * sum5);
  const std::complex<double> deg5 = volume * (e1 * f0 + e2 * sum2 + e3 * sum3 + e4 * sum4);

  // Split where the fourth difference is largest; near-ties go to the widest axis.
  const double max_fourth = *std::max_element(fourth.begin(), fourth.end());
  std::size_t axis = 0;
  double widest = -1.0;
  for (std::size_t k = 0; k < N; ++k) {
    const bool candidate = max_fourth == 0.0 || fourth[k] >= max_fourth * (1.0 - 1e-10);
    if (candidate && h[k] > widest) {
      widest = h[k];
      axis = k;
    }
  }
  return {deg7, std::abs(deg7 - deg5), axis};
}

template <std::size_t N, class F>
RuleOutput<N> apply_rule(F& f, const std::array<double, N>& c, const std::array<double, N>& h) {
  if constexpr (N == 1) {
    return gauss_kronrod15(f, c, h);
  } else {
    return genz_malik<N>(f, c, h);
  }
}

}  // namespace detail

/// Integrates `f` over `region`. `f` takes `const std::array<double, N>&` and
/// returns a value convertible to `std::complex<double>`.
///
/// Stops when abs_error <= max(abs_tol, rel_tol * |value|). If `max_evals`
/// would be exceeded first, the current estimate is returned with
/// `converged == false`.
template <std::size_t N, class F>
IntegralEstimate integrate_cubature(F&& f, const Region<N>& region, const CubatureOptions& options = {}) {
  region.validate();
  options.validate();

  struct Cell {
    std::array<double, N> center;
    std::array<double, N> half;
    std::complex<double> value;
    double error;
    std::size_t axis;
    std::uint64_t id;
  };
  // Max-heap on error; among equal errors the oldest cell is split first.
  const auto less_urgent = [](const Cell& a, const Cell& b) {
    if (a.error != b.error) return a.error < b.error;
    return a.id > b.id;
  };

  constexpr std::size_t points = detail::rule_points<N>();
  std::uint64_t next_id = 0;
  std::size_t evaluations = 0;

  auto make_cell = [&](const std::array<double, N>& center, const std::array<double, N>& half) {
    const auto out = detail::apply_rule<N>(f, center, half);
    evaluations += points;
    return Cell{center, half, out.value, out.error, out.split_axis, next_id++};
  };

  std::array<double, N> center{};
  std::array<double, N> half{};
  for (std::size_t i = 0; i < N; ++i) {
    center[i] = 0.5 * (region.lower[i] + region.upper[i]);
    half[i] = 0.5 * (region.upper[i] - region.lower[i]);
  }

  std::vector<Cell> heap;
  heap.push_back(make_cell(center, half));
  std::complex<double> total = heap.front().value;
  double total_error = heap.front().error;

  const auto resum = [&] {
    total = {};
    total_error = 0.0;
    for (const Cell& cell : heap) {
      total += cell.value;
      total_error += cell.error;
    }
  };

  bool converged = true;
  std::size_t splits = 0;
  while (!(total_error <= std::max(options.abs_tol, options.rel_tol * std::abs(total)))) {
    if (evaluations + 2 * points > options.max_evals) {
      converged = false;
      break;
    }
    std::pop_heap(heap.begin(), heap.end(), less_urgent);
    const Cell parent = heap.back();
    heap.pop_back();

    std::array<double, N> child_half = parent.half;
    child_half[parent.axis] *= 0.5;
    std::array<double, N> left = parent.center;
    std::array<double, N> right = parent.center;
    left[parent.axis] -= child_half[parent.axis];
    right[parent.axis] += child_half[parent.axis];

    Cell a = make_cell(left, child_half);
    Cell b = make_cell(right, child_half);
    total += a.value + b.value - parent.value;
    total_error += a.error + b.error - parent.error;
    heap.push_back(a);
    std::push_heap(heap.begin(), heap.end(), less_urgent);
    heap.push_back(b);
    std::push_heap(heap.begin(), heap.end(), less_urgent);

    // Running sums drift; refresh them now and then.
    if (++splits % 1024 == 0) resum();
  }
  resum();
  if (converged && !(total_error <= std::max(options.abs_tol, options.rel_tol * std::abs(total)))) {
    converged = false;
  }
  return IntegralEstimate{total, total_error, evaluations, converged};
}

}  // namespace spdc::math
