#include "qpwegner/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qpwegner {

double InteractionSpec::value(const LatticeVector& x1, const LatticeVector& x2) const {
  if (x1.size() != x2.size())
    throw std::invalid_argument("interaction: particle coordinates of unequal dimension");
  int dist = 0;
  for (std::size_t i = 0; i < x1.size(); ++i) dist = std::max(dist, std::abs(x1[i] - x2[i]));
  return dist <= range ? strength : 0.0;
}

std::int64_t TwoParticleCube::dimension() const {
  const std::int64_t one = box1().site_count();
  return one * one;
}

std::vector<LatticeVector> shadow(const TwoParticleCube& cube) {
  std::vector<LatticeVector> sites = cube.box1().sites();
  const std::vector<LatticeVector> other = cube.box2().sites();
  sites.insert(sites.end(), other.begin(), other.end());
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  return sites;
}

CenterPair exchange(const CenterPair& centers) { return {centers.second, centers.first}; }

TwoParticleCube exchanged(const TwoParticleCube& cube) {
  return {cube.center2, cube.center1, cube.radius};
}

double center_distance(const CenterPair& a, const CenterPair& b, CenterNorm norm) {
  if (a.first.size() != b.first.size() || a.second.size() != b.second.size())
    throw std::invalid_argument("center_distance: dimension mismatch");
  if (norm == CenterNorm::euclidean) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.first.size(); ++i) {
      const double d = a.first[i] - b.first[i];
      sum += d * d;
    }
    for (std::size_t i = 0; i < a.second.size(); ++i) {
      const double d = a.second[i] - b.second[i];
      sum += d * d;
    }
    return std::sqrt(sum);
  }
  int dist = 0;
  for (std::size_t i = 0; i < a.first.size(); ++i)
    dist = std::max(dist, std::abs(a.first[i] - b.first[i]));
  for (std::size_t i = 0; i < a.second.size(); ++i)
    dist = std::max(dist, std::abs(a.second[i] - b.second[i]));
  return static_cast<double>(dist);
}

bool separation_ok(const CenterPair& a, const CenterPair& b, int radius, CenterNorm norm) {
  const double d = std::min(center_distance(a, b, norm), center_distance(a, exchange(b), norm));
  return d > 8.0 * radius;
}

double HamiltonianMatrix::trace() const {
  double t = 0.0;
  for (int i = 0; i < dim_; ++i) t += at(i, i);
  return t;
}

double HamiltonianMatrix::inf_norm() const {
  double best = 0.0;
  for (int i = 0; i < dim_; ++i) {
    double row = 0.0;
    for (int j = 0; j < dim_; ++j) row += std::abs(at(i, j));
    best = std::max(best, row);
  }
  return best;
}

namespace {

// Strides of the lexicographic site order of a box: the last coordinate
// varies fastest.
std::vector<std::int64_t> box_strides(int d, int side) {
  std::vector<std::int64_t> strides(static_cast<std::size_t>(d));
  std::int64_t s = 1;
  for (int a = d - 1; a >= 0; --a) {
    strides[static_cast<std::size_t>(a)] = s;
    s *= side;
  }
  return strides;
}

double potential_at(const std::map<LatticeVector, double>& values, const LatticeVector& x) {
  auto it = values.find(x);
  if (it == values.end())
    throw std::invalid_argument("assemble: missing potential value for a cube site");
  return it->second;
}

}  // namespace

HamiltonianMatrix assemble_one_particle(const LatticeCube& cube,
                                        const std::map<LatticeVector, double>& potential_values) {
  const auto sites = cube.sites();
  const int n = static_cast<int>(sites.size());
  const int d = static_cast<int>(cube.center.size());
  const int side = 2 * cube.radius + 1;
  const auto strides = box_strides(d, side);
  HamiltonianMatrix h(n);
  for (int i = 0; i < n; ++i) {
    const LatticeVector& x = sites[static_cast<std::size_t>(i)];
    h.set_symmetric(i, i, potential_at(potential_values, x));
    for (int a = 0; a < d; ++a) {
      // hop x -> x + e_a; the mirrored hop is set symmetrically
      if (x[static_cast<std::size_t>(a)] <
          cube.center[static_cast<std::size_t>(a)] + cube.radius) {
        const int j = i + static_cast<int>(strides[static_cast<std::size_t>(a)]);
        h.set_symmetric(i, j, 1.0);
      }
    }
  }
  return h;
}

HamiltonianMatrix assemble_two_particle(const TwoParticleCube& cube,
                                        const std::map<LatticeVector, double>& shadow_potential,
                                        const InteractionSpec& interaction) {
  const auto sites1 = cube.box1().sites();
  const auto sites2 = cube.box2().sites();
  const int n1 = static_cast<int>(sites1.size());
  const int n2 = static_cast<int>(sites2.size());
  const int d = cube.particle_dim();
  const int side = 2 * cube.radius + 1;
  const auto strides = box_strides(d, side);

  std::vector<double> v1(static_cast<std::size_t>(n1)), v2(static_cast<std::size_t>(n2));
  for (int i = 0; i < n1; ++i)
    v1[static_cast<std::size_t>(i)] = potential_at(shadow_potential, sites1[static_cast<std::size_t>(i)]);
  for (int i = 0; i < n2; ++i)
    v2[static_cast<std::size_t>(i)] = potential_at(shadow_potential, sites2[static_cast<std::size_t>(i)]);

  HamiltonianMatrix h(n1 * n2);
  for (int i1 = 0; i1 < n1; ++i1) {
    const LatticeVector& x1 = sites1[static_cast<std::size_t>(i1)];
    for (int i2 = 0; i2 < n2; ++i2) {
      const LatticeVector& x2 = sites2[static_cast<std::size_t>(i2)];
      const int row = i1 * n2 + i2;
      h.set_symmetric(row, row,
                      v1[static_cast<std::size_t>(i1)] + v2[static_cast<std::size_t>(i2)] +
                          interaction.value(x1, x2));
      for (int a = 0; a < d; ++a) {
        const auto stride = static_cast<int>(strides[static_cast<std::size_t>(a)]);
        if (x1[static_cast<std::size_t>(a)] <
            cube.center1[static_cast<std::size_t>(a)] + cube.radius)
          h.set_symmetric(row, (i1 + stride) * n2 + i2, 1.0);
        if (x2[static_cast<std::size_t>(a)] <
            cube.center2[static_cast<std::size_t>(a)] + cube.radius)
          h.set_symmetric(row, i1 * n2 + (i2 + stride), 1.0);
      }
    }
  }
  return h;
}

std::map<LatticeVector, double> shadow_potential(const TwoParticleCube& cube,
                                                 const RandeletteField& field,
                                                 const ShiftAction& action,
                                                 const TorusPoint& omega) {
  std::map<LatticeVector, double> values;
  for (const auto& x : shadow(cube)) values[x] = potential(field, action, omega, x);
  return values;
}

HamiltonianMatrix assemble_two_particle(const TwoParticleCube& cube, const RandeletteField& field,
                                        const ShiftAction& action, const TorusPoint& omega,
                                        const InteractionSpec& interaction) {
  return assemble_two_particle(cube, shadow_potential(cube, field, action, omega), interaction);
}

}  // namespace qpwegner
