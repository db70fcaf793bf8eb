// Dense symmetric eigensolver (Householder tridiagonalization followed by
// implicit-shift QL iteration) and spectrum-level queries.
#pragma once

#include <vector>

#include "qpwegner/hamiltonian.hpp"

namespace qpwegner {

// Eigenvalues in nondecreasing order, counted with multiplicities.
struct Spectrum {
  std::vector<double> eigenvalues;

  int dimension() const { return static_cast<int>(eigenvalues.size()); }
};

struct EigenDiagnostics {
  double max_residual = 0.0;  // max_j |M v_j - lambda_j v_j|_2
  double trace_error = 0.0;   // |sum lambda - trace M|
  // Orthonormal eigenvectors, row-major n x n; column j pairs with the
  // j-th sorted eigenvalue.
  std::vector<double> eigenvectors;
};

// Full spectrum of a symmetric matrix. With non-null diagnostics the
// eigenvectors are accumulated as well and the residual / trace checks
// are reported. Throws on failure to converge.
Spectrum eigenvalues_symmetric(const HamiltonianMatrix& m,
                               EigenDiagnostics* diagnostics = nullptr);

// Verified solve: computes eigenvectors, requires the residual to stay
// below 1e-10 * (1 + |M|_inf) and the eigenvalue sum to match the trace
// within 1e-9 * dimension. Throws std::runtime_error otherwise.
Spectrum eigenvalues_symmetric_checked(const HamiltonianMatrix& m);

// min_j |lambda_j - energy|.
double dist_to_energy(const Spectrum& s, double energy);

// min_{i,j} |lambda_i - mu_j|, via a merge of the two sorted lists.
double dist_between_spectra(const Spectrum& a, const Spectrum& b);

// card{ j : lambda_j <= energy } and its normalization by the dimension.
int count_below(const Spectrum& s, double energy);
double ids_estimate(const Spectrum& s, double energy);

}  // namespace qpwegner
