#include "qpwegner/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpwegner {

ConfidenceInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials <= 0) throw std::invalid_argument("wilson_interval: trials must be positive");
  if (successes < 0 || successes > trials)
    throw std::invalid_argument("wilson_interval: successes out of range");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double radius = (z / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  ConfidenceInterval ci;
  // the endpoints are exact at the boundary counts
  ci.low = successes == 0 ? 0.0 : std::max(0.0, center - radius);
  ci.high = successes == trials ? 1.0 : std::min(1.0, center + radius);
  return ci;
}

static LineFit fit_core(std::span<const double> x, std::span<const double> y,
                        std::span<const double> w, bool residual_se) {
  const std::size_t n = x.size();
  if (n != y.size() || (!w.empty() && w.size() != n))
    throw std::invalid_argument("fit_line: mismatched input lengths");
  if (n < 2) throw std::invalid_argument("fit_line: need at least two points");
  double sw = 0.0, swx = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    swx += wi * x[i];
    swy += wi * y[i];
  }
  const double xbar = swx / sw;
  const double ybar = swy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sxx += wi * (x[i] - xbar) * (x[i] - xbar);
    sxy += wi * (x[i] - xbar) * (y[i] - ybar);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  fit.points_used = static_cast<int>(n);
  if (residual_se) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (fit.intercept + fit.slope * x[i]);
      rss += r * r;
    }
    const double sigma2 = (n > 2) ? rss / static_cast<double>(n - 2) : 0.0;
    fit.slope_se = std::sqrt(sigma2 / sxx);
    fit.intercept_se = std::sqrt(sigma2 * (1.0 / static_cast<double>(n) + xbar * xbar / sxx));
  } else {
    fit.slope_se = std::sqrt(1.0 / sxx);
    fit.intercept_se = std::sqrt(1.0 / sw + xbar * xbar / sxx);
  }
  return fit;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  return fit_core(x, y, {}, true);
}

LineFit fit_line_weighted(std::span<const double> x, std::span<const double> y,
                          std::span<const double> w) {
  return fit_core(x, y, w, false);
}

LineFit fit_epsilon_slope(const std::vector<ConcentrationEstimate>& estimates) {
  std::vector<double> x, y, w;
  for (const auto& e : estimates) {
    if (!(e.p_hat > 0.0) || !(e.p_hat < 1.0)) continue;
    if (!(e.epsilon > 0.0)) continue;
    x.push_back(std::log(e.epsilon));
    y.push_back(std::log(e.p_hat));
    // Half-width of the CI on the log scale, floored to keep exact
    // synthetic inputs (ci_low == ci_high) well-posed.
    double sigma = 0.0;
    if (e.ci_low > 0.0 && e.ci_high > e.ci_low)
      sigma = (std::log(e.ci_high) - std::log(e.ci_low)) / (2.0 * 1.959963984540054);
    sigma = std::max(sigma, 1e-12);
    w.push_back(1.0 / (sigma * sigma));
  }
  if (x.size() < 3)
    throw std::invalid_argument(
        "fit_epsilon_slope: need at least three grid points with 0 < p_hat < 1");
  return fit_core(x, y, w, false);
}

}  // namespace qpwegner
