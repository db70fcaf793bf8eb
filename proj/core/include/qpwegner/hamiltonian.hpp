// Finite-volume one- and two-particle tight-binding Hamiltonians with
// Dirichlet boundary conditions: pure nearest-neighbor hopping plus an
// on-site potential, and for two particles a short-range interaction and
// the particle-exchange symmetry.
#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "qpwegner/randelette.hpp"
#include "qpwegner/torus.hpp"

namespace qpwegner {

// U(x1, x2) = strength * 1{|x1 - x2|_inf <= range}; symmetric, finite range.
struct InteractionSpec {
  double strength = 1.0;
  int range = 1;

  double value(const LatticeVector& x1, const LatticeVector& x2) const;
};

// The box Lambda_L(u1) x Lambda_L(u2) in Z^(2d).
struct TwoParticleCube {
  LatticeVector center1;
  LatticeVector center2;
  int radius = 0;

  int particle_dim() const { return static_cast<int>(center1.size()); }
  std::int64_t dimension() const;  // (2L+1)^(2d)
  LatticeCube box1() const { return {center1, radius}; }
  LatticeCube box2() const { return {center2, radius}; }
};

// Total shadow: the union of the two one-particle boxes, sorted
// lexicographically. Invariant under particle exchange.
std::vector<LatticeVector> shadow(const TwoParticleCube& cube);

using CenterPair = std::pair<LatticeVector, LatticeVector>;

// S : (u1, u2) -> (u2, u1); an involution.
CenterPair exchange(const CenterPair& centers);
TwoParticleCube exchanged(const TwoParticleCube& cube);

enum class CenterNorm { max_norm, euclidean };

// Distance on Z^(2d) between center pairs; the max-norm is the default
// throughout, matching the metric used on the torus.
double center_distance(const CenterPair& a, const CenterPair& b,
                       CenterNorm norm = CenterNorm::max_norm);

// min{ |a - b|, |a - S(b)| } > 8L, the two-volume separation requirement.
bool separation_ok(const CenterPair& a, const CenterPair& b, int radius,
                   CenterNorm norm = CenterNorm::max_norm);

// Dense symmetric matrix, row-major. Row indices follow the documented
// site order: sites of a box ascend lexicographically, and a two-particle
// pair (x1, x2) maps to index(x1) * n + index(x2).
class HamiltonianMatrix {
 public:
  explicit HamiltonianMatrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, 0.0) {}

  int dimension() const { return dim_; }
  double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }
  void set_symmetric(int i, int j, double v) {
    a_[static_cast<std::size_t>(i) * dim_ + j] = v;
    a_[static_cast<std::size_t>(j) * dim_ + i] = v;
  }
  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  double trace() const;
  double inf_norm() const;

 private:
  int dim_;
  std::vector<double> a_;
};

// H = Delta + V on the cube, Dirichlet: hops leaving the box are dropped,
// the Laplacian carries no diagonal part. Throws if a site has no
// potential value.
HamiltonianMatrix assemble_one_particle(const LatticeCube& cube,
                                        const std::map<LatticeVector, double>& potential_values);

// Two-particle H = Delta_1 + Delta_2 + V(x1) + V(x2) + U(x1, x2) from
// explicit potential values on the shadow.
HamiltonianMatrix assemble_two_particle(const TwoParticleCube& cube,
                                        const std::map<LatticeVector, double>& shadow_potential,
                                        const InteractionSpec& interaction);

// Same, with the quasi-periodic potential V(x) = v(T^x omega; theta)
// evaluated once per shadow site and broadcast over the box.
HamiltonianMatrix assemble_two_particle(const TwoParticleCube& cube, const RandeletteField& field,
                                        const ShiftAction& action, const TorusPoint& omega,
                                        const InteractionSpec& interaction);

std::map<LatticeVector, double> shadow_potential(const TwoParticleCube& cube,
                                                 const RandeletteField& field,
                                                 const ShiftAction& action,
                                                 const TorusPoint& omega);

}  // namespace qpwegner
