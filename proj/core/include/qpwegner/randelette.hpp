// The grand-ensemble potential v(omega; theta): a hierarchical expansion
// over dyadic indicator cubes of the torus, with polynomially decaying
// level coefficients and lazily sampled uniform [0,1] amplitudes. A sample
// theta is identified with a 64-bit seed; every amplitude theta_{n,k} is a
// pure function of (seed, n, k), which makes "fix theta" operational and
// evaluation order irrelevant.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "qpwegner/torus.hpp"

namespace qpwegner {

// Level coefficients a_n = sign * c_upper * n^(-kappa). The admissible
// window is c_lower * n^(-m_exponent) <= |a_n| <= c_upper * n^(-kappa)
// with 1 < kappa <= m_exponent and 0 < c_lower <= c_upper. Positive sign
// (the default) makes the potential nondecreasing in every amplitude;
// the negative sign is supported but reverses that monotonicity, so
// monotonicity-based checks only apply to the positive choice.
struct CoefficientSchedule {
  double c_upper = 1.0;
  double c_lower = 1.0;
  double kappa = 2.0;
  double m_exponent = 2.0;
  int sign = 1;

  void validate() const;
};

double coefficient(const CoefficientSchedule& schedule, std::uint64_t n);

// Certified bound on the dropped tail sum_{n > levels} |a_n|, by integral
// comparison: c_upper * levels^(1-kappa) / (kappa - 1).
double tail_bound(const CoefficientSchedule& schedule, std::uint64_t levels);

// 1 / |a_{n0}|: bound on the conditional density of v given the levels
// below n0 (the level-n0 term alone is a_{n0} * theta with theta uniform
// on [0,1]; convolving with the independent finer levels cannot raise the
// sup of the density).
double conditional_density_bound(const CoefficientSchedule& schedule, int split_level);

// A point of the auxiliary parameter space: amplitudes theta_{n,k}.
// Immutable and cheap to copy. Test hooks: a constant sample, single-entry
// overrides, and re-seeding of all levels >= some depth (used to resample
// the fine levels while the coarse ones stay frozen).
class ThetaSample {
 public:
  static ThetaSample keyed(std::uint64_t master_seed);
  static ThetaSample constant(double value);

  ThetaSample with_override(std::uint64_t level, std::uint64_t flat_index, double value) const;
  ThetaSample with_reseeded_tail(int from_level, std::uint64_t tail_seed) const;

  // theta_{n,k} for the flat cube index k at depth n; no range check.
  double raw_value(std::uint64_t level, std::uint64_t flat_index) const;

  std::uint64_t master_seed() const { return master_seed_; }

 private:
  std::uint64_t master_seed_ = 0;
  std::uint64_t tail_seed_ = 0;
  int tail_from_level_ = 0;  // 0: no reseeded tail
  bool constant_mode_ = false;
  double constant_value_ = 0.0;
  using OverrideMap = std::map<std::pair<std::uint64_t, std::uint64_t>, double>;
  std::shared_ptr<const OverrideMap> overrides_;
};

// Range-checked theta_{n,k}: requires 1 <= k <= 2^(nu*n) and nu*n <= 63.
double theta_value(const ThetaSample& theta, int nu, std::uint64_t level,
                   std::uint64_t flat_index);

// Hard cap on the summed depth: level-n cube indices are keyed by u64 flat
// indices, so nu * n must stay below 64 bits.
int max_truncation_levels(int nu);

// Smallest depth meeting the certified tail target (1e-8), clamped to the
// key-space cap, and never below required_min. Throws if required_min
// itself exceeds the cap.
int default_truncation_levels(const CoefficientSchedule& schedule, int nu, int required_min);

inline constexpr double kDefaultTailTarget = 1e-8;

struct RandeletteField {
  CoefficientSchedule schedule;
  ThetaSample theta;
  int nu = 1;
  int truncation_levels = 16;
  std::vector<double> coefficients;  // coefficients[n-1] = a_n

  static RandeletteField make(CoefficientSchedule schedule, ThetaSample theta, int nu,
                              int truncation_levels);

  // sum of the kept coefficient magnitudes plus the certified tail: a
  // uniform bound on |v| since every theta_{n,k} lies in [0,1].
  double max_value_bound() const;
};

// v(omega; theta) truncated at the field's depth: one term per level, the
// term being a_n * theta_{n, k(n, omega)} for the unique cube containing
// omega. Summed in ascending level order.
double evaluate_v(const RandeletteField& field, const TorusPoint& omega);

// V(x; omega; theta) = v(T^x omega; theta).
double potential(const RandeletteField& field, const ShiftAction& action,
                 const TorusPoint& omega, const LatticeVector& x);

struct SplitValue {
  double xi = 0.0;   // levels below split_level
  double eta = 0.0;  // levels split_level and above
};

// Splits the potential at a level: xi is the prefix sum of the levels
// below split_level (measurable with respect to the coarse amplitudes
// alone), and eta is defined as total - xi so that xi + eta reproduces
// potential() exactly.
SplitValue decompose(const RandeletteField& field, const ShiftAction& action,
                     const TorusPoint& omega, const LatticeVector& x, int split_level);

}  // namespace qpwegner
