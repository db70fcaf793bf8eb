// The nu-torus T^nu with the max-norm metric, Z^d shift actions
// omega -> omega + A*x mod 1, dyadic partitions of the torus, and the
// minimal spacing of finite-volume trajectories.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace qpwegner {

using LatticeVector = std::vector<int>;

// Fractional part in [0, 1); -0.0 is normalized to +0.0.
double wrap_unit(double x);

class TorusPoint {
 public:
  TorusPoint() = default;
  // Wraps every coordinate into [0, 1).
  explicit TorusPoint(std::vector<double> coords);

  int dimension() const { return static_cast<int>(coords_.size()); }
  double coord(int i) const { return coords_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& coords() const { return coords_; }

 private:
  std::vector<double> coords_;
};

// The affine action T^x omega = omega + A*x mod 1 with A a nu x d matrix.
// The Diophantine exponent/constant are optional metadata; they are never
// enforced, only estimated empirically (see estimate_diophantine).
struct ShiftAction {
  int dimension = 1;  // lattice dimension d
  int nu = 1;         // torus dimension
  std::vector<double> frequency;  // nu x d, row-major
  std::optional<double> diophantine_b;
  std::optional<double> diophantine_c;

  // Golden-mean rotation (sqrt(5)-1)/2 on T^1, badly approximable.
  static ShiftAction golden_mean_1d();

  void validate() const;
  double frequency_at(int row, int col) const {
    return frequency[static_cast<std::size_t>(row) * static_cast<std::size_t>(dimension) +
                     static_cast<std::size_t>(col)];
  }
};

// Cube Lambda_L(u) = {x : |x - u|_inf <= L} with (2L+1)^d sites.
struct LatticeCube {
  LatticeVector center;
  int radius = 0;

  std::int64_t site_count() const;
  // Sites in ascending lexicographic order (first coordinate outermost).
  std::vector<LatticeVector> sites() const;
  bool contains(const LatticeVector& x) const;
};

// Identifies the dyadic cube C_{n,k} = I_{n,i_1} x ... x I_{n,i_nu} with
// I_{n,i} = [(i-1)/2^n, i/2^n). Indices are 1-based. The flat index is the
// mixed-radix encoding k - 1 = sum_j (i_j - 1) * 2^(n*j), coordinate 0
// least significant; it fits a u64 only for nu*level <= 63.
struct DyadicCubeIndex {
  int level = 1;
  std::vector<std::uint64_t> multi_index;

  std::uint64_t flat_index() const;
};

TorusPoint apply_shift(const ShiftAction& action, const TorusPoint& omega,
                       const LatticeVector& x);

// Max-norm distance on the torus; always in [0, 1/2].
double torus_distance(const TorusPoint& a, const TorusPoint& b);

// {T^x omega : x in sites}, in the order the sites are given.
std::vector<TorusPoint> trajectory(const ShiftAction& action, const TorusPoint& omega,
                                   const std::vector<LatticeVector>& sites);

// delta_L: minimum pairwise torus distance over the trajectory of the cube.
// Shift-invariance makes the value independent of omega and of the center.
// Throws if two trajectory points coincide to floating-point resolution
// (rational frequency).
double min_spacing(const ShiftAction& action, const TorusPoint& omega,
                   const LatticeCube& cube);

// Smallest n >= 1 with 2^-n < delta: any two points at distance >= delta
// land in different cubes of every partition at depth >= n.
int separation_level(double delta);

// The unique dyadic cube of depth `level` containing omega. Supports
// level <= 63.
DyadicCubeIndex partition_index(int level, const TorusPoint& omega);

struct SpacingTable {
  std::vector<int> radii;
  std::vector<double> deltas;
  double fitted_b = 0.0;        // delta_L ~ c * L^(-B)
  double fitted_c = 0.0;
  double min_delta_times_l = 0.0;
};

// Empirical Diophantine fit: regress log delta_L on log L over the given
// radii. fitted_b is the decay exponent (positive for irrational rotations).
SpacingTable estimate_diophantine(const ShiftAction& action, const std::vector<int>& radii);

}  // namespace qpwegner
