// Binomial interval estimation and small least-squares fits shared by the
// Monte Carlo experiments.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qpwegner {

struct ConfidenceInterval {
  double low = 0.0;
  double high = 1.0;
};

// Wilson score interval; z defaults to the two-sided 95% normal quantile.
ConfidenceInterval wilson_interval(std::int64_t successes, std::int64_t trials,
                                   double z = 1.959963984540054);

// One Monte Carlo estimate of P{event at threshold epsilon}, with its
// diagnostic upper bound (meaning depends on the experiment).
struct ConcentrationEstimate {
  double epsilon = 0.0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::int64_t n_samples = 0;
  double bound = 0.0;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  int points_used = 0;
};

// Ordinary least squares with residual-based standard errors.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Weighted least squares with known per-point variances 1/w; standard
// errors follow from the weights alone.
LineFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                          std::span<const double> w);

// Log-log slope of p_hat against epsilon, weighted by the width of the
// confidence interval on the log scale. Uses only points with
// 0 < p_hat < 1; throws if fewer than three remain.
LineFit fit_epsilon_slope(const std::vector<ConcentrationEstimate>& estimates);

}  // namespace qpwegner
