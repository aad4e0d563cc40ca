#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "oracles.hpp"
#include "spdc/optimize.hpp"

using namespace spdc;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIoError;
}

SweepSpec spec_for(Metric m, AxisRange alpha = {0.3, 4.0, 41}, AxisRange phi0 = {-2.0, 10.0, 41}) {
  SweepSpec s;
  s.metric = m;
  s.alpha = alpha;
  s.phi0 = phi0;
  return s;
}

// Optimum of the Fourier oracle by golden-section coordinate descent.
std::pair<double, double> oracle_k2_argmax(double xi, double a, double p) {
  auto golden = [](auto f, double lo, double hi) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > 1e-7) {
      if (f1 > f2) {
        hi = x2, x2 = x1, f2 = f1, x1 = hi - g * (hi - lo), f1 = f(x1);
      } else {
        lo = x1, x1 = x2, f1 = f2, x2 = lo + g * (hi - lo), f2 = f(x2);
      }
    }
    return 0.5 * (lo + hi);
  };
  for (int it = 0; it < 30; ++it) {
    a = golden([&](double x) { return oracle::k2_fourier(xi, x, p); }, std::max(0.05, a - 0.5), a + 0.5);
    p = golden([&](double x) { return oracle::k2_fourier(xi, a, x); }, p - 1.0, p + 1.0);
  }
  return {a, p};
}

}  // namespace

TEST(AxisRange, Endpoints) {
  const AxisRange r{0.3, 4.0, 41};
  EXPECT_DOUBLE_EQ(r.at(0), 0.3);
  EXPECT_DOUBLE_EQ(r.at(40), 4.0);
  EXPECT_NEAR(r.at(20), 2.15, 1e-15);
  EXPECT_NEAR(r.step(), 0.0925, 1e-15);
  EXPECT_EQ(r.clamp(5.0), 4.0);
}

TEST(LogSpaced, TwentyFivePoints) {
  const auto xs = log_spaced(0.03, 40.0, 25);
  ASSERT_EQ(xs.size(), 25u);
  EXPECT_DOUBLE_EQ(xs.front(), 0.03);
  EXPECT_DOUBLE_EQ(xs.back(), 40.0);
  for (std::size_t k = 1; k < xs.size(); ++k) {
    EXPECT_NEAR(std::log(xs[k] / xs[k - 1]), std::log(40.0 / 0.03) / 24.0, 1e-12);
  }
  EXPECT_EQ(code_of([] { log_spaced(0.0, 1.0, 5); }), ErrorCode::kInvalidArgument);
}

TEST(SweepSpec, Validation) {
  SweepSpec s = spec_for(Metric::K2, {0.0, 1.0, 5});
  s.xi_values = {1.0};
  EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::kInvalidArgument);
  s = spec_for(Metric::K2, {1.0, 1.0, 5});
  EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::kInvalidArgument);
  s = spec_for(Metric::K2);
  s.xi_values = {-1.0};
  EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::kInvalidArgument);
}

TEST(ParallelFor, CoversEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  detail::parallel_for(hits.size(), 4, [&](std::size_t k) { hits[k] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(ParallelFor, RethrowsWorkerException) {
  EXPECT_THROW(detail::parallel_for(100, 3,
                                    [](std::size_t k) {
                                      if (k == 57) throw std::runtime_error("boom");
                                    }),
               std::runtime_error);
}

TEST(SweepGrid, K0IsFlatInAlpha) {
  const GridResult g = sweep_grid(spec_for(Metric::K0, {0.5, 3.0, 6}, {-2.0, 8.0, 6}), 1.0);
  for (std::size_t j = 0; j < g.n_phi0; ++j) {
    for (std::size_t i = 1; i < g.n_alpha; ++i) EXPECT_EQ(g.at(i, j).value, g.at(0, j).value);
  }
}

TEST(SweepGrid, K2HasUniqueInteriorMaximum) {
  const GridResult g = sweep_grid(spec_for(Metric::K2, {0.5, 3.0, 26}, {-2.0, 8.0, 26}), 1.0);
  int local_maxima = 0;
  for (std::size_t i = 1; i + 1 < g.n_alpha; ++i) {
    for (std::size_t j = 1; j + 1 < g.n_phi0; ++j) {
      bool is_max = true;
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (di || dj) is_max = is_max && g.at(i, j).value > g.at(i + di, j + dj).value;
        }
      }
      local_maxima += is_max;
    }
  }
  EXPECT_EQ(local_maxima, 1);
  const std::size_t best = g.best_index();
  const std::size_t i = best / g.n_phi0, j = best % g.n_phi0;
  EXPECT_GT(i, 0u);
  EXPECT_LT(i, g.n_alpha - 1);
  EXPECT_GT(j, 0u);
  EXPECT_LT(j, g.n_phi0 - 1);
}

TEST(SweepGrid, HeraldingReachesNinetyPercent) {
  const GridResult g = sweep_grid(spec_for(Metric::Gamma21, {0.3, 4.0, 21}, {-2.0, 10.0, 21}), 1.0);
  EXPECT_GE(g.cells[g.best_index()].value, 0.9);
}

TEST(SweepGrid, ThreadCountDoesNotChangeResults) {
  SweepSpec s = spec_for(Metric::Gamma2, {0.5, 3.0, 9}, {-2.0, 8.0, 9});
  const GridResult one = sweep_grid(s, 2.0);
  s.threads = 4;
  const GridResult four = sweep_grid(s, 2.0);
  ASSERT_EQ(one.cells.size(), four.cells.size());
  for (std::size_t k = 0; k < one.cells.size(); ++k) {
    EXPECT_EQ(one.cells[k].value, four.cells[k].value);
    EXPECT_EQ(one.cells[k].error, four.cells[k].error);
  }
}

TEST(SweepGrid, RowMajorLayout) {
  const GridResult g = sweep_grid(spec_for(Metric::K2, {0.5, 1.5, 3}, {0.0, 2.0, 4}), 1.0);
  EXPECT_EQ(g.cells.size(), 12u);
  EXPECT_DOUBLE_EQ(g.at(1, 2).alpha, 1.0);
  EXPECT_NEAR(g.at(1, 2).phi0, 4.0 / 3.0, 1e-15);
}

TEST(MaximizeAtXi, BoydKleinman) {
  const OptimumRecord r = maximize_at_xi(spec_for(Metric::K2), 2.84);
  EXPECT_NEAR(r.alpha_opt, 1.414, 0.07);
  EXPECT_NEAR(r.phi0_opt, 3.2, 0.2);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.metric_value, oracle::k2_fourier(2.84, r.alpha_opt, r.phi0_opt), 1e-4 * r.metric_value);
  EXPECT_NEAR(r.k0_at_opt, oracle::k0_closed_form(r.phi0_opt), 0.01 * r.k0_at_opt);
}

TEST(MaximizeAtXi, MatchesOracleOptimum) {
  for (double xi : {0.03, 0.3, 2.84, 10.0}) {
    const OptimumRecord r = maximize_at_xi(spec_for(Metric::K2), xi);
    const auto [a, p] = oracle_k2_argmax(xi, r.alpha_opt, r.phi0_opt);
    EXPECT_NEAR(r.alpha_opt, a, 5e-3) << xi;
    EXPECT_NEAR(r.phi0_opt, p, 1e-2) << xi;
    EXPECT_TRUE(r.converged) << xi;
  }
}

TEST(MaximizeAtXi, WeakFocusingOptimumIsBelowUnity) {
  // At xi = 0.03 the optimal target waist sits well below the pump waist.
  const OptimumRecord r = maximize_at_xi(spec_for(Metric::K2), 0.03);
  EXPECT_NEAR(r.alpha_opt, 0.361, 0.01);
  EXPECT_NEAR(r.phi0_opt, 0.885, 0.02);
}

TEST(MaximizeAtXi, StartPointIndependent) {
  const OptimumRecord a = maximize_at_xi(spec_for(Metric::K2), 1.0);
  const OptimumRecord b = maximize_at_xi(spec_for(Metric::K2, {0.5, 3.5, 13}, {-1.0, 9.0, 13}), 1.0);
  const OptimumRecord c = maximize_at_xi(spec_for(Metric::K2, {0.8, 2.4, 7}, {0.0, 6.0, 7}), 1.0);
  for (const auto* r : {&b, &c}) {
    EXPECT_NEAR(r->alpha_opt, a.alpha_opt, 1e-3);
    EXPECT_NEAR(r->phi0_opt, a.phi0_opt, 1e-3);
    EXPECT_NEAR(r->metric_value, a.metric_value, 1e-3 * a.metric_value);
  }
}

TEST(MaximizeAtXi, CouplingEfficiency) {
  const OptimumRecord r = maximize_at_xi(spec_for(Metric::Gamma2), 1.6);
  EXPECT_TRUE(r.converged);
  EXPECT_GT(r.metric_value, 0.8);
  EXPECT_LT(r.metric_value, 1.0);
}

TEST(MaximizeAtXi, HeraldingToleranceIsTighterInAlpha) {
  SweepSpec s = spec_for(Metric::Gamma21);
  const OptimumRecord r = maximize_at_xi(s, 1.0);
  EXPECT_GE(r.metric_value, 0.9);
  const auto opts = cubature_at(1e-5);
  auto g21 = [&](double a, double p) { return evaluate_metric(Metric::Gamma21, {1.0, a, 0.0, p, 0.0}, {}, {}, opts).value; };
  const double dphi = std::max(std::abs(g21(r.alpha_opt, r.phi0_opt + 0.5) - r.metric_value),
                               std::abs(g21(r.alpha_opt, r.phi0_opt - 0.5) - r.metric_value));
  const double dalpha = std::min(std::abs(g21(1.5 * r.alpha_opt, r.phi0_opt) - r.metric_value),
                                 std::abs(g21(0.5 * r.alpha_opt, r.phi0_opt) - r.metric_value));
  EXPECT_LT(dphi, dalpha);
}

TEST(MaximizeAtXi, RejectsNonMaximizableMetric) {
  EXPECT_EQ(code_of([] { maximize_at_xi(spec_for(Metric::K0), 1.0); }), ErrorCode::kInvalidArgument);
}

TEST(InterpolatedArgmax, RecoversParabolaVertex) {
  std::vector<OptimumRecord> curve;
  for (double xi : log_spaced(0.1, 10.0, 9)) {
    OptimumRecord r;
    r.xi = xi;
    const double x = std::log(xi) - std::log(2.0);
    r.metric_value = 1.0 - x * x;
    curve.push_back(r);
  }
  EXPECT_NEAR(interpolated_argmax(curve), 2.0, 1e-12);
}

TEST(InterpolatedArgmax, EndpointFallsBack) {
  std::vector<OptimumRecord> curve(3);
  for (int k = 0; k < 3; ++k) {
    curve[k].xi = 1.0 + k;
    curve[k].metric_value = k;
  }
  EXPECT_EQ(interpolated_argmax(curve), 3.0);
}

TEST(XiCurve, OneRecordPerXiInOrder) {
  SweepSpec s = spec_for(Metric::K2, {0.5, 3.0, 11}, {-2.0, 8.0, 11});
  s.xi_values = {0.5, 2.0, 1.0};
  const auto curve = xi_curve(s);
  ASSERT_EQ(curve.size(), 3u);
  EXPECT_EQ(curve[0].xi, 0.5);
  EXPECT_EQ(curve[1].xi, 2.0);
  EXPECT_EQ(curve[2].xi, 1.0);
  EXPECT_GT(curve[1].metric_value, curve[2].metric_value);
  EXPECT_GT(curve[2].metric_value, curve[0].metric_value);
}

TEST(SpectralCurve, Examples) {
  EXPECT_NEAR(spectral_curve({0.0}).front().omega2_factor, 0.7526928, 1e-6);
  EXPECT_NEAR(spectral_curve({std::numbers::sqrt2}).front().omega2_factor, 0.5322336, 1e-7);
  const auto c = spectral_curve({0.0, 1.0, 2.0});
  EXPECT_GT(c[0].omega2_factor, c[1].omega2_factor);
  EXPECT_GT(c[1].omega2_factor, c[2].omega2_factor);
}
