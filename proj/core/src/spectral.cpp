#include "qpwegner/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qpwegner {

namespace {

// Householder reduction of a symmetric matrix to tridiagonal form
// (classic tred2 scheme, zero-based). On return d holds the diagonal and
// e[1..n-1] the subdiagonal. In vector mode `a` accumulates the orthogonal
// transformation Q with A = Q T Q^T; otherwise its contents are scratch.
void tridiagonalize(std::vector<double>& a, int n, std::vector<double>& d,
                    std::vector<double>& e, bool want_vectors) {
  auto A = [&](int i, int j) -> double& {
    return a[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
  };
  for (int i = n - 1; i >= 1; --i) {
    const int l = i - 1;
    double h = 0.0;
    if (l > 0) {
      double scale = 0.0;
      for (int k = 0; k <= l; ++k) scale += std::abs(A(i, k));
      if (scale == 0.0) {
        e[i] = A(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          A(i, k) /= scale;
          h += A(i, k) * A(i, k);
        }
        double f = A(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        A(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          if (want_vectors) A(j, i) = A(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += A(j, k) * A(i, k);
          for (int k = j + 1; k <= l; ++k) g += A(k, j) * A(i, k);
          e[j] = g / h;
          f += e[j] * A(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = A(i, j);
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k) A(j, k) -= f * e[k] + g * A(i, k);
        }
      }
    } else {
      e[i] = A(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    if (want_vectors) {
      if (d[i] != 0.0) {
        for (int j = 0; j < i; ++j) {
          double g = 0.0;
          for (int k = 0; k < i; ++k) g += A(i, k) * A(k, j);
          for (int k = 0; k < i; ++k) A(k, j) -= g * A(k, i);
        }
      }
      d[i] = A(i, i);
      A(i, i) = 1.0;
      for (int j = 0; j < i; ++j) A(j, i) = A(i, j) = 0.0;
    } else {
      d[i] = A(i, i);
    }
  }
}

// Implicit-shift QL iteration on a symmetric tridiagonal matrix (tql2
// scheme). If z is non-null its columns are rotated along, turning the
// accumulated Q into the eigenvector matrix. Throws when an eigenvalue
// fails to converge within the iteration cap.
void ql_implicit_shift(std::vector<double>& d, std::vector<double>& e, int n,
                       std::vector<double>* z, int max_iterations = 60) {
  auto Z = [&](int i, int j) -> double& {
    return (*z)[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
  };
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m != l) {
        if (iter++ == max_iterations)
          throw std::runtime_error("eigensolver: QL iteration failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (z) {
            for (int k = 0; k < n; ++k) {
              f = Z(k, i + 1);
              Z(k, i + 1) = s * Z(k, i) + c * f;
              Z(k, i) = c * Z(k, i) - s * f;
            }
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

Spectrum eigenvalues_symmetric(const HamiltonianMatrix& m, EigenDiagnostics* diagnostics) {
  const int n = m.dimension();
  if (n < 1) throw std::invalid_argument("eigenvalues_symmetric: empty matrix");
  std::vector<double> work = m.data();
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  const bool want_vectors = diagnostics != nullptr;
  tridiagonalize(work, n, d, e, want_vectors);
  ql_implicit_shift(d, e, n, want_vectors ? &work : nullptr);

  if (!diagnostics) {
    std::sort(d.begin(), d.end());
    return Spectrum{std::move(d)};
  }

  // Sort the eigenpairs together so column j matches the j-th value.
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return d[static_cast<std::size_t>(a)] < d[static_cast<std::size_t>(b)]; });
  std::vector<double> sorted(static_cast<std::size_t>(n));
  std::vector<double> vectors(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const int src = order[static_cast<std::size_t>(j)];
    sorted[static_cast<std::size_t>(j)] = d[static_cast<std::size_t>(src)];
    for (int i = 0; i < n; ++i)
      vectors[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)] =
          work[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(src)];
  }

  double max_res = 0.0;
  std::vector<double> mv(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < n; ++k)
        s += m.at(i, k) * vectors[static_cast<std::size_t>(k) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
      mv[static_cast<std::size_t>(i)] = s;
    }
    double res = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = mv[static_cast<std::size_t>(i)] -
                       sorted[static_cast<std::size_t>(j)] *
                           vectors[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)];
      res += r * r;
    }
    max_res = std::max(max_res, std::sqrt(res));
  }
  double sum = 0.0;
  for (double lambda : sorted) sum += lambda;
  diagnostics->max_residual = max_res;
  diagnostics->trace_error = std::abs(sum - m.trace());
  diagnostics->eigenvectors = std::move(vectors);
  return Spectrum{std::move(sorted)};
}

Spectrum eigenvalues_symmetric_checked(const HamiltonianMatrix& m) {
  EigenDiagnostics diag;
  Spectrum s = eigenvalues_symmetric(m, &diag);
  const double residual_cap = 1e-10 * (1.0 + m.inf_norm());
  if (diag.max_residual > residual_cap)
    throw std::runtime_error("eigensolver verification: residual " +
                             std::to_string(diag.max_residual) + " exceeds " +
                             std::to_string(residual_cap));
  const double trace_cap = 1e-9 * static_cast<double>(m.dimension());
  if (diag.trace_error > trace_cap)
    throw std::runtime_error("eigensolver verification: trace mismatch " +
                             std::to_string(diag.trace_error) + " exceeds " +
                             std::to_string(trace_cap));
  return s;
}

double dist_to_energy(const Spectrum& s, double energy) {
  if (s.eigenvalues.empty()) throw std::invalid_argument("dist_to_energy: empty spectrum");
  double best = std::numeric_limits<double>::infinity();
  for (double lambda : s.eigenvalues) best = std::min(best, std::abs(lambda - energy));
  return best;
}

double dist_between_spectra(const Spectrum& a, const Spectrum& b) {
  if (a.eigenvalues.empty() || b.eigenvalues.empty())
    throw std::invalid_argument("dist_between_spectra: empty spectrum");
  double best = std::numeric_limits<double>::infinity();
  std::size_t i = 0, j = 0;
  while (i < a.eigenvalues.size() && j < b.eigenvalues.size()) {
    best = std::min(best, std::abs(a.eigenvalues[i] - b.eigenvalues[j]));
    if (a.eigenvalues[i] <= b.eigenvalues[j])
      ++i;
    else
      ++j;
  }
  return best;
}

int count_below(const Spectrum& s, double energy) {
  return static_cast<int>(std::upper_bound(s.eigenvalues.begin(), s.eigenvalues.end(), energy) -
                          s.eigenvalues.begin());
}

double ids_estimate(const Spectrum& s, double energy) {
  if (s.eigenvalues.empty()) return 0.0;
  return static_cast<double>(count_below(s, energy)) / static_cast<double>(s.dimension());
}

}  // namespace qpwegner
