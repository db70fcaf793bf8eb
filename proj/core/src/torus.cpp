#include "qpwegner/torus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qpwegner/stats.hpp"

namespace qpwegner {

double wrap_unit(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f = 0.0;  // tiny negative inputs can round x - floor(x) up to 1
  return f + 0.0;         // normalize -0.0
}

TorusPoint::TorusPoint(std::vector<double> coords) : coords_(std::move(coords)) {
  for (double& c : coords_) c = wrap_unit(c);
}

ShiftAction ShiftAction::golden_mean_1d() {
  ShiftAction a;
  a.dimension = 1;
  a.nu = 1;
  a.frequency = {(std::sqrt(5.0) - 1.0) / 2.0};
  a.diophantine_b = 1.0;
  return a;
}

void ShiftAction::validate() const {
  if (dimension < 1) throw std::invalid_argument("shift action: lattice dimension d must be >= 1");
  if (nu < 1) throw std::invalid_argument("shift action: torus dimension nu must be >= 1");
  if (frequency.size() != static_cast<std::size_t>(nu) * static_cast<std::size_t>(dimension))
    throw std::invalid_argument("shift action: frequency matrix must have nu*d entries");
}

std::int64_t LatticeCube::site_count() const {
  std::int64_t side = 2 * static_cast<std::int64_t>(radius) + 1;
  std::int64_t count = 1;
  for (std::size_t i = 0; i < center.size(); ++i) count *= side;
  return count;
}

std::vector<LatticeVector> LatticeCube::sites() const {
  const int d = static_cast<int>(center.size());
  std::vector<LatticeVector> out;
  out.reserve(static_cast<std::size_t>(site_count()));
  LatticeVector x(center.size());
  for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = center[static_cast<std::size_t>(i)] - radius;
  while (true) {
    out.push_back(x);
    int axis = d - 1;
    while (axis >= 0) {
      auto a = static_cast<std::size_t>(axis);
      if (x[a] < center[a] + radius) {
        ++x[a];
        break;
      }
      x[a] = center[a] - radius;
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

bool LatticeCube::contains(const LatticeVector& x) const {
  if (x.size() != center.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i] - center[i]) > radius) return false;
  return true;
}

std::uint64_t DyadicCubeIndex::flat_index() const {
  const int nu = static_cast<int>(multi_index.size());
  if (static_cast<std::int64_t>(nu) * level > 63)
    throw std::invalid_argument("dyadic flat index overflows 64 bits: nu*level must be <= 63");
  std::uint64_t k = 0;
  for (int j = nu - 1; j >= 0; --j)
    k = (k << level) | (multi_index[static_cast<std::size_t>(j)] - 1);
  return k + 1;
}

TorusPoint apply_shift(const ShiftAction& action, const TorusPoint& omega,
                       const LatticeVector& x) {
  if (omega.dimension() != action.nu)
    throw std::invalid_argument("apply_shift: omega dimension does not match action nu");
  if (static_cast<int>(x.size()) != action.dimension)
    throw std::invalid_argument("apply_shift: lattice vector dimension does not match action d");
  std::vector<double> out(static_cast<std::size_t>(action.nu));
  for (int i = 0; i < action.nu; ++i) {
    double s = omega.coord(i);
    for (int j = 0; j < action.dimension; ++j)
      s += action.frequency_at(i, j) * x[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s;
  }
  return TorusPoint(std::move(out));
}

double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  if (a.dimension() != b.dimension())
    throw std::invalid_argument("torus_distance: dimension mismatch");
  double dist = 0.0;
  for (int i = 0; i < a.dimension(); ++i) {
    double d = std::abs(a.coord(i) - b.coord(i));
    d = std::min(d, 1.0 - d);
    dist = std::max(dist, d);
  }
  return dist;
}

std::vector<TorusPoint> trajectory(const ShiftAction& action, const TorusPoint& omega,
                                   const std::vector<LatticeVector>& sites) {
  if (sites.empty()) throw std::invalid_argument("trajectory: empty site set");
  std::vector<TorusPoint> out;
  out.reserve(sites.size());
  for (const auto& x : sites) out.push_back(apply_shift(action, omega, x));
  return out;
}

double min_spacing(const ShiftAction& action, const TorusPoint& omega,
                   const LatticeCube& cube) {
  if (cube.site_count() < 2)
    throw std::invalid_argument("min_spacing: cube must contain at least two sites");
  const auto points = trajectory(action, omega, cube.sites());
  double best = 1.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      best = std::min(best, torus_distance(points[i], points[j]));
  if (best < 1e-15)
    throw std::runtime_error(
        "min_spacing: degenerate orbit, two trajectory points coincide to "
        "floating-point resolution (frequency is rationally dependent)");
  return best;
}

int separation_level(double delta) {
  if (!(delta > 0.0) || delta > 0.5)
    throw std::invalid_argument("separation_level: delta must lie in (0, 1/2]");
  int n = 1;
  while (std::ldexp(1.0, -n) >= delta) ++n;
  return n;
}

DyadicCubeIndex partition_index(int level, const TorusPoint& omega) {
  if (level < 1 || level > 63)
    throw std::invalid_argument("partition_index: level must lie in [1, 63]");
  DyadicCubeIndex idx;
  idx.level = level;
  idx.multi_index.resize(static_cast<std::size_t>(omega.dimension()));
  for (int c = 0; c < omega.dimension(); ++c) {
    // ldexp is exact, and the u64 cast truncates, so this is floor(w * 2^n).
    idx.multi_index[static_cast<std::size_t>(c)] =
        static_cast<std::uint64_t>(std::ldexp(omega.coord(c), level)) + 1;
  }
  return idx;
}

SpacingTable estimate_diophantine(const ShiftAction& action, const std::vector<int>& radii) {
  if (radii.empty()) throw std::invalid_argument("estimate_diophantine: empty radius list");
  SpacingTable table;
  table.radii = radii;
  table.deltas.reserve(radii.size());
  const TorusPoint origin(std::vector<double>(static_cast<std::size_t>(action.nu), 0.0));
  std::vector<double> logl, logd;
  double min_dl = std::numeric_limits<double>::infinity();
  for (int radius : radii) {
    LatticeCube cube{LatticeVector(static_cast<std::size_t>(action.dimension), 0), radius};
    const double delta = min_spacing(action, origin, cube);
    table.deltas.push_back(delta);
    logl.push_back(std::log(static_cast<double>(radius)));
    logd.push_back(std::log(delta));
    min_dl = std::min(min_dl, delta * radius);
  }
  const LineFit fit = fit_line(logl, logd);
  table.fitted_b = -fit.slope;
  table.fitted_c = std::exp(fit.intercept);
  table.min_delta_times_l = min_dl;
  return table;
}

}  // namespace qpwegner
