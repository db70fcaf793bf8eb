// Diagonal-monotonicity checks and an empirical concentration harness for
// Stollmann-type bounds: for a diagonally monotone functional under a
// product measure, the mass any interval of width eps can carry is at most
// |J| * s(mu, eps).
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qpwegner/hamiltonian.hpp"
#include "qpwegner/stats.hpp"

namespace qpwegner {

// Coordinates over a finite index set J = {0, ..., m-1}.
struct ParameterVector {
  std::vector<double> values;

  int size() const { return static_cast<int>(values.size()); }
  ParameterVector plus(const ParameterVector& r) const;
  ParameterVector plus_diagonal(double t) const;
};

// A candidate diagonally monotone functional: nondecreasing in each
// coordinate and growing at least linearly along the diagonal direction.
// The property is verified by sampling, never assumed.
using MonotoneFunctional = std::function<double(std::span<const double>)>;

struct DmCheckResult {
  bool pass = false;
  double monotone_margin = 0.0;  // Phi(q + r) - Phi(q)
  double diagonal_margin = 0.0;  // Phi(q + t e) - Phi(q) - t
};

// Evaluates both defining conditions at the given points; margins below
// -slack fail.
DmCheckResult check_dm(const MonotoneFunctional& phi, const ParameterVector& q,
                       const ParameterVector& r, double t, double slack = 1e-12);

// Concentration function of the uniform [0,1] measure: s(eps) = eps for
// eps in (0, 1].
double concentration_uniform(double epsilon);

struct StollmannResult {
  ConcentrationEstimate estimate;  // epsilon = interval width, bound = |J| * s(width)
  int j_size = 0;
  double interval_low = 0.0;
  double interval_width = 0.0;
  bool pass = false;  // ci_low does not contradict the bound
};

// One marginal draw from a per-sample stream; the default is uniform on
// [0,1]. Supplying a custom marginal is the hook for non-uniform product
// measures; in that case pass the concentration s(mu, width) of the
// marginal as well, since it enters the bound |J| * s(mu, width).
class SplitStream;
using MarginalSampler = std::function<double(SplitStream&)>;

// Monte Carlo estimate of mu^J{ q : Phi(q) in (a, a + width) } under a
// product measure with the given marginal, with the Wilson 95% interval
// against the bound |J| * s(width). Per-sample streams are keyed by
// (seed, index), so results never depend on scheduling.
StollmannResult stollmann_empirical(const MonotoneFunctional& phi, int j_size,
                                    double interval_low, double interval_width,
                                    std::int64_t samples, std::uint64_t seed, int threads = 1,
                                    const MarginalSampler& marginal = {},
                                    std::optional<double> concentration_of_width = {});

// The k-th sorted eigenvalue of the two-particle Hamiltonian, viewed as a
// functional of the potential values on the shadow (in shadow order).
MonotoneFunctional eigenvalue_functional(const TwoParticleCube& cube,
                                         const InteractionSpec& interaction, int k);

}  // namespace qpwegner
