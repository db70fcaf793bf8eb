// Monte Carlo eigenvalue-concentration experiments: the classical
// one-particle bound with an IID potential, the two-particle one- and
// two-volume bounds for IID potentials, and the quasi-periodic one- and
// two-volume experiments at a fixed grand-ensemble sample, where the
// probability runs over the torus variable alone.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qpwegner/hamiltonian.hpp"
#include "qpwegner/randelette.hpp"
#include "qpwegner/stats.hpp"
#include "qpwegner/torus.hpp"

namespace qpwegner {

enum class ExperimentMode {
  classical_1p,
  iid_2p_one_volume,
  iid_2p_two_volume,
  qp_one_volume,
  qp_two_volume,
};

std::string to_string(ExperimentMode mode);

struct WegnerExperimentConfig {
  ExperimentMode mode = ExperimentMode::qp_one_volume;
  int d = 1;
  int nu = 1;
  int radius = 2;  // L
  CenterPair center;          // one-volume two-particle cube
  CenterPair center_prime;    // two-volume modes
  CenterPair center_second;
  double enclosing_exponent = 2.0;  // r > 1; enclosing box scale N = ceil(L^r)
  double theta_budget_exponent = 1.0;  // b > 0, reported only
  double energy = 0.0;
  std::vector<double> epsilon_grid;
  std::int64_t omega_samples = 10000;
  std::uint64_t seed = 12345;
  std::uint64_t theta_seed = 12345;
  ShiftAction action = ShiftAction::golden_mean_1d();
  CoefficientSchedule schedule;
  InteractionSpec interaction;
  int truncation_levels = 0;  // 0: auto
  int threads = 1;
  bool verify_eigen = false;  // residual/trace checks on every solve
  // Test-only: run a two-volume experiment even when the separation
  // requirement fails (demonstrates why the requirement is needed).
  bool allow_separation_violation = false;
};

// Validates mode-specific requirements; throws std::invalid_argument with
// a message naming the violated condition.
void validate_config(const WegnerExperimentConfig& config);

// The config with defaulted fields filled (centers, epsilon grid), after
// the same validation the runners apply.
WegnerExperimentConfig finalize_config(const WegnerExperimentConfig& config);

struct ExperimentResult {
  ExperimentMode mode = ExperimentMode::classical_1p;
  std::vector<ConcentrationEstimate> estimates;  // ascending epsilon
  bool pass = false;
  std::string pass_criterion;

  // Conditioning diagnostics (quasi-periodic modes).
  int enclosing_radius = 0;          // N
  LatticeVector enclosing_center;    // v
  double delta_n = 0.0;              // trajectory spacing over Lambda_N(v)
  int separation_depth = 0;          // n0(N)
  double coefficient_at_split = 0.0; // a_{n0}
  double density_bound = 0.0;        // 1 / a_{n0}
  int truncation_levels = 0;
  double truncation_tail = 0.0;

  // Slope of log p_hat vs log epsilon (quasi-periodic modes).
  std::optional<LineFit> slope;
  // Envelope constants making the diagnostic bound shapes cover the data.
  double fitted_log_constant = 0.0;    // vs ln^M N * L^(3d or 5d) * eps
  double fitted_power_constant = 0.0;  // vs L^(M+b+r+3d or 5d) * eps
};

ExperimentResult run_classical_wegner(const WegnerExperimentConfig& config);
ExperimentResult run_iid_two_particle(const WegnerExperimentConfig& config);
ExperimentResult run_qp_one_volume(const WegnerExperimentConfig& config);
ExperimentResult run_qp_two_volume(const WegnerExperimentConfig& config);

// Dispatch on config.mode.
ExperimentResult run_experiment(const WegnerExperimentConfig& config);

// The Hamiltonian the experiment assembles for its first sample, for
// debugging dumps; follows the exact sampling conventions of the runs.
HamiltonianMatrix first_sample_matrix(const WegnerExperimentConfig& config);

// Window accepted for the fitted epsilon-exponent of the quasi-periodic
// experiments (the testable content is linearity in epsilon).
inline constexpr double kSlopeWindowLow = 0.8;
inline constexpr double kSlopeWindowHigh = 1.2;

}  // namespace qpwegner
