#include "qpwegner/dm_stollmann.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "qpwegner/parallel.hpp"
#include "qpwegner/rng.hpp"
#include "qpwegner/spectral.hpp"

namespace qpwegner {

namespace {
constexpr std::uint64_t kStollmannTag = 0x73746f6cu;
}

ParameterVector ParameterVector::plus(const ParameterVector& r) const {
  if (r.values.size() != values.size())
    throw std::invalid_argument("parameter vector: size mismatch");
  ParameterVector out = *this;
  for (std::size_t i = 0; i < values.size(); ++i) out.values[i] += r.values[i];
  return out;
}

ParameterVector ParameterVector::plus_diagonal(double t) const {
  ParameterVector out = *this;
  for (double& v : out.values) v += t;
  return out;
}

DmCheckResult check_dm(const MonotoneFunctional& phi, const ParameterVector& q,
                       const ParameterVector& r, double t, double slack) {
  if (r.values.size() != q.values.size())
    throw std::invalid_argument("check_dm: q and r must have the same index set");
  for (double v : r.values)
    if (v < 0.0) throw std::invalid_argument("check_dm: r must be componentwise nonnegative");
  if (!(t > 0.0)) throw std::invalid_argument("check_dm: t must be positive");
  const double base = phi(q.values);
  DmCheckResult result;
  result.monotone_margin = phi(q.plus(r).values) - base;
  result.diagonal_margin = phi(q.plus_diagonal(t).values) - base - t;
  result.pass = result.monotone_margin >= -slack && result.diagonal_margin >= -slack;
  return result;
}

double concentration_uniform(double epsilon) {
  if (!(epsilon > 0.0) || epsilon > 1.0)
    throw std::invalid_argument("concentration_uniform: epsilon must lie in (0, 1]");
  return epsilon;
}

StollmannResult stollmann_empirical(const MonotoneFunctional& phi, int j_size,
                                    double interval_low, double interval_width,
                                    std::int64_t samples, std::uint64_t seed, int threads,
                                    const MarginalSampler& marginal,
                                    std::optional<double> concentration_of_width) {
  if (j_size < 1) throw std::invalid_argument("stollmann: index set must be nonempty");
  if (samples < 1) throw std::invalid_argument("stollmann: sample count must be positive");
  if (interval_width < 0.0) throw std::invalid_argument("stollmann: interval width must be >= 0");
  if (marginal && !concentration_of_width && interval_width > 0.0)
    throw std::invalid_argument(
        "stollmann: a custom marginal needs its concentration value for the bound");

  std::atomic<std::int64_t> hits{0};
  parallel_for(samples, threads, [&](std::int64_t i) {
    SplitStream stream(derive_key(seed, {kStollmannTag, static_cast<std::uint64_t>(i)}));
    std::vector<double> q(static_cast<std::size_t>(j_size));
    for (double& v : q) v = marginal ? marginal(stream) : stream.next_unit();
    const double value = phi(q);
    if (value > interval_low && value < interval_low + interval_width)
      hits.fetch_add(1, std::memory_order_relaxed);
  });

  double s_width = 0.0;
  if (interval_width > 0.0)
    s_width = concentration_of_width ? *concentration_of_width
                                     : concentration_uniform(std::min(interval_width, 1.0));

  const std::int64_t h = hits.load();
  const ConfidenceInterval ci = wilson_interval(h, samples);
  StollmannResult result;
  result.j_size = j_size;
  result.interval_low = interval_low;
  result.interval_width = interval_width;
  result.estimate.epsilon = interval_width;
  result.estimate.p_hat = static_cast<double>(h) / static_cast<double>(samples);
  result.estimate.ci_low = ci.low;
  result.estimate.ci_high = ci.high;
  result.estimate.n_samples = samples;
  result.estimate.bound = j_size * s_width;
  result.pass = result.estimate.ci_low <= result.estimate.bound;
  return result;
}

MonotoneFunctional eigenvalue_functional(const TwoParticleCube& cube,
                                         const InteractionSpec& interaction, int k) {
  const auto sites = shadow(cube);
  if (k < 0 || static_cast<std::int64_t>(k) >= cube.dimension())
    throw std::invalid_argument("eigenvalue_functional: eigenvalue index out of range");
  return [cube, interaction, sites, k](std::span<const double> q) -> double {
    if (q.size() != sites.size())
      throw std::invalid_argument("eigenvalue functional: wrong number of shadow values");
    std::map<LatticeVector, double> values;
    for (std::size_t i = 0; i < sites.size(); ++i) values[sites[i]] = q[i];
    const Spectrum s = eigenvalues_symmetric(assemble_two_particle(cube, values, interaction));
    return s.eigenvalues[static_cast<std::size_t>(k)];
  };
}

}  // namespace qpwegner
