#include "qpwegner/randelette.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qpwegner/rng.hpp"

namespace qpwegner {

namespace {
constexpr std::uint64_t kThetaTag = 0x7468657461u;  // stream tag for theta draws
}

void CoefficientSchedule::validate() const {
  if (!(kappa > 1.0))
    throw std::invalid_argument("coefficient schedule: kappa must exceed 1 for convergence");
  if (!(m_exponent >= kappa))
    throw std::invalid_argument("coefficient schedule: m_exponent must be >= kappa");
  if (!(c_upper > 0.0) || !(c_lower > 0.0) || !(c_lower <= c_upper))
    throw std::invalid_argument("coefficient schedule: need 0 < c_lower <= c_upper");
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("coefficient schedule: sign must be +1 or -1");
}

double coefficient(const CoefficientSchedule& schedule, std::uint64_t n) {
  if (n < 1) throw std::invalid_argument("coefficient: level must be >= 1");
  return schedule.sign * schedule.c_upper * std::pow(static_cast<double>(n), -schedule.kappa);
}

double tail_bound(const CoefficientSchedule& schedule, std::uint64_t levels) {
  if (levels < 1) throw std::invalid_argument("tail_bound: levels must be >= 1");
  return schedule.c_upper * std::pow(static_cast<double>(levels), 1.0 - schedule.kappa) /
         (schedule.kappa - 1.0);
}

double conditional_density_bound(const CoefficientSchedule& schedule, int split_level) {
  if (split_level < 1)
    throw std::invalid_argument("conditional_density_bound: split level must be >= 1");
  return 1.0 / std::abs(coefficient(schedule, static_cast<std::uint64_t>(split_level)));
}

ThetaSample ThetaSample::keyed(std::uint64_t master_seed) {
  ThetaSample t;
  t.master_seed_ = master_seed;
  return t;
}

ThetaSample ThetaSample::constant(double value) {
  ThetaSample t;
  t.constant_mode_ = true;
  t.constant_value_ = value;
  return t;
}

ThetaSample ThetaSample::with_override(std::uint64_t level, std::uint64_t flat_index,
                                       double value) const {
  ThetaSample t = *this;
  OverrideMap map = overrides_ ? *overrides_ : OverrideMap{};
  map[{level, flat_index}] = value;
  t.overrides_ = std::make_shared<const OverrideMap>(std::move(map));
  return t;
}

ThetaSample ThetaSample::with_reseeded_tail(int from_level, std::uint64_t tail_seed) const {
  if (from_level < 1)
    throw std::invalid_argument("with_reseeded_tail: level must be >= 1");
  ThetaSample t = *this;
  t.tail_from_level_ = from_level;
  t.tail_seed_ = tail_seed;
  return t;
}

double ThetaSample::raw_value(std::uint64_t level, std::uint64_t flat_index) const {
  if (overrides_) {
    auto it = overrides_->find({level, flat_index});
    if (it != overrides_->end()) return it->second;
  }
  if (constant_mode_) return constant_value_;
  const std::uint64_t seed =
      (tail_from_level_ > 0 && level >= static_cast<std::uint64_t>(tail_from_level_))
          ? tail_seed_
          : master_seed_;
  return keyed_unit(seed, {kThetaTag, level, flat_index});
}

double theta_value(const ThetaSample& theta, int nu, std::uint64_t level,
                   std::uint64_t flat_index) {
  if (nu < 1) throw std::invalid_argument("theta_value: nu must be >= 1");
  if (level < 1) throw std::invalid_argument("theta_value: level must be >= 1");
  const std::uint64_t bits = static_cast<std::uint64_t>(nu) * level;
  if (bits > 63)
    throw std::invalid_argument("theta_value: nu*level must be <= 63 (index key space)");
  const std::uint64_t count = std::uint64_t{1} << bits;
  if (flat_index < 1 || flat_index > count)
    throw std::invalid_argument("theta_value: flat index out of range for level " +
                                std::to_string(level));
  return theta.raw_value(level, flat_index);
}

int max_truncation_levels(int nu) {
  if (nu < 1) throw std::invalid_argument("max_truncation_levels: nu must be >= 1");
  return 63 / nu;
}

int default_truncation_levels(const CoefficientSchedule& schedule, int nu, int required_min) {
  schedule.validate();
  const int cap = max_truncation_levels(nu);
  if (required_min > cap)
    throw std::invalid_argument(
        "truncation: required separation depth " + std::to_string(required_min) +
        " exceeds the representable depth " + std::to_string(cap) + " for nu=" +
        std::to_string(nu));
  int levels = cap;
  for (int n = 1; n <= cap; ++n) {
    if (tail_bound(schedule, static_cast<std::uint64_t>(n)) <= kDefaultTailTarget) {
      levels = n;
      break;
    }
  }
  return std::max(levels, std::max(required_min, 1));
}

RandeletteField RandeletteField::make(CoefficientSchedule schedule, ThetaSample theta, int nu,
                                      int truncation_levels) {
  schedule.validate();
  if (nu < 1) throw std::invalid_argument("randelette field: nu must be >= 1");
  if (truncation_levels < 1)
    throw std::invalid_argument("randelette field: truncation must be >= 1 level");
  if (truncation_levels > max_truncation_levels(nu))
    throw std::invalid_argument("randelette field: truncation exceeds representable depth " +
                                std::to_string(max_truncation_levels(nu)) + " for nu=" +
                                std::to_string(nu));
  RandeletteField f;
  f.schedule = schedule;
  f.theta = std::move(theta);
  f.nu = nu;
  f.truncation_levels = truncation_levels;
  f.coefficients.reserve(static_cast<std::size_t>(truncation_levels));
  for (int n = 1; n <= truncation_levels; ++n)
    f.coefficients.push_back(coefficient(schedule, static_cast<std::uint64_t>(n)));
  return f;
}

double RandeletteField::max_value_bound() const {
  double sum = 0.0;
  for (double a : coefficients) sum += std::abs(a);
  return sum + tail_bound(schedule, static_cast<std::uint64_t>(truncation_levels));
}

namespace {

// Accumulates levels [1, upto]; when split > 0, *prefix receives the
// accumulator value just before level `split` is added.
double accumulate_levels(const RandeletteField& field, const TorusPoint& omega, int split,
                         double* prefix) {
  if (omega.dimension() != field.nu)
    throw std::invalid_argument("evaluate_v: omega dimension does not match field nu");
  const int nu = field.nu;
  // Exact fixed-point image of each coordinate: the index of the level-n
  // cube is a right shift of floor(w * 2^63).
  std::uint64_t z[64];
  for (int c = 0; c < nu; ++c)
    z[c] = static_cast<std::uint64_t>(std::ldexp(omega.coord(c), 63));
  double acc = 0.0;
  for (int n = 1; n <= field.truncation_levels; ++n) {
    if (n == split && prefix) *prefix = acc;
    std::uint64_t flat = 0;
    for (int c = nu - 1; c >= 0; --c) flat = (flat << n) | (z[c] >> (63 - n));
    acc += field.coefficients[static_cast<std::size_t>(n - 1)] *
           field.theta.raw_value(static_cast<std::uint64_t>(n), flat + 1);
  }
  return acc;
}

}  // namespace

double evaluate_v(const RandeletteField& field, const TorusPoint& omega) {
  return accumulate_levels(field, omega, 0, nullptr);
}

double potential(const RandeletteField& field, const ShiftAction& action,
                 const TorusPoint& omega, const LatticeVector& x) {
  return evaluate_v(field, apply_shift(action, omega, x));
}

SplitValue decompose(const RandeletteField& field, const ShiftAction& action,
                     const TorusPoint& omega, const LatticeVector& x, int split_level) {
  if (split_level < 1 || split_level > field.truncation_levels)
    throw std::invalid_argument("decompose: split level must lie in [1, truncation]");
  const TorusPoint point = apply_shift(action, omega, x);
  SplitValue split;
  const double total = accumulate_levels(field, point, split_level, &split.xi);
  split.eta = total - split.xi;
  return split;
}

}  // namespace qpwegner
