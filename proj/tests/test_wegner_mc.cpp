#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qpwegner/randelette.hpp"
#include "qpwegner/wegner_mc.hpp"

using namespace qpwegner;

namespace {

WegnerExperimentConfig classical_config() {
  WegnerExperimentConfig c;
  c.mode = ExperimentMode::classical_1p;
  c.d = 1;
  c.radius = 2;
  c.energy = 0.0;
  c.epsilon_grid = {0.002, 0.005, 0.01, 0.02};
  c.omega_samples = 20000;
  c.seed = 101;
  c.threads = 2;
  ShiftAction a;
  a.frequency = {0.0};
  c.action = a;
  return c;
}

WegnerExperimentConfig qp1_config() {
  WegnerExperimentConfig c;
  c.mode = ExperimentMode::qp_one_volume;
  c.d = 1;
  c.nu = 1;
  c.radius = 2;
  c.enclosing_exponent = 2.0;
  c.energy = 0.0;
  c.omega_samples = 2000;
  c.seed = 7;
  c.theta_seed = 7;
  c.threads = 2;
  c.truncation_levels = 24;
  return c;
}

bool exactly_monotone(const std::vector<ConcentrationEstimate>& estimates) {
  for (std::size_t i = 1; i < estimates.size(); ++i)
    if (estimates[i].p_hat < estimates[i - 1].p_hat) return false;
  return true;
}

}  // namespace

TEST_CASE("classical bound holds with margin at small volumes") {
  const ExperimentResult r = run_classical_wegner(classical_config());
  REQUIRE(r.estimates.size() == 4);
  CHECK(r.pass);
  for (const auto& e : r.estimates) {
    CHECK(e.bound == doctest::Approx(5.0 * e.epsilon).epsilon(1e-12));
    CHECK(e.ci_low <= e.bound);
    CHECK(e.p_hat <= 1.0);
  }
  CHECK(exactly_monotone(r.estimates));
}

TEST_CASE("huge epsilon makes the event certain, the estimate stays valid") {
  WegnerExperimentConfig c = classical_config();
  c.epsilon_grid = {50.0};
  c.omega_samples = 500;
  const ExperimentResult r = run_classical_wegner(c);
  CHECK(r.estimates[0].p_hat == 1.0);
  CHECK(r.estimates[0].ci_high == 1.0);
}

TEST_CASE("tiny epsilon has negligible mass") {
  WegnerExperimentConfig c = classical_config();
  c.epsilon_grid = {1e-9};
  c.omega_samples = 2000;
  const ExperimentResult r = run_classical_wegner(c);
  CHECK(r.estimates[0].p_hat <= 0.005);
}

TEST_CASE("experiments are deterministic and thread-count independent") {
  WegnerExperimentConfig c = classical_config();
  c.omega_samples = 5000;
  c.threads = 1;
  const ExperimentResult a = run_classical_wegner(c);
  c.threads = 4;
  const ExperimentResult b = run_classical_wegner(c);
  REQUIRE(a.estimates.size() == b.estimates.size());
  for (std::size_t i = 0; i < a.estimates.size(); ++i) {
    CHECK(a.estimates[i].p_hat == b.estimates[i].p_hat);
    CHECK(a.estimates[i].ci_low == b.estimates[i].ci_low);
    CHECK(a.estimates[i].ci_high == b.estimates[i].ci_high);
  }
}

TEST_CASE("iid one-volume bound at L = 1") {
  WegnerExperimentConfig c;
  c.mode = ExperimentMode::iid_2p_one_volume;
  c.d = 1;
  c.radius = 1;
  c.energy = 0.0;
  c.epsilon_grid = {0.005, 0.01, 0.02};
  c.omega_samples = 20000;
  c.seed = 55;
  c.threads = 2;
  ShiftAction a;
  a.frequency = {0.0};
  c.action = a;
  const ExperimentResult r = run_iid_two_particle(c);
  CHECK(r.pass);
  // |Lambda| = 9, bound = 27 * 2 eps
  CHECK(r.estimates[0].bound == doctest::Approx(27.0 * 0.01).epsilon(1e-9));
  CHECK(exactly_monotone(r.estimates));
}

TEST_CASE("iid two-volume rejects symmetric centers before sampling") {
  WegnerExperimentConfig c;
  c.mode = ExperimentMode::iid_2p_two_volume;
  c.d = 1;
  c.radius = 1;
  c.center_prime = {{0}, {5}};
  c.center_second = {{5}, {0}};  // the exchange image of center_prime
  c.omega_samples = 100;
  ShiftAction a;
  a.frequency = {0.0};
  c.action = a;
  CHECK_THROWS_WITH_AS(run_iid_two_particle(c),
                       doctest::Contains("separation requirement"), std::invalid_argument);
}

TEST_CASE("iid two-volume bound holds for separated cubes") {
  WegnerExperimentConfig c;
  c.mode = ExperimentMode::iid_2p_two_volume;
  c.d = 1;
  c.radius = 1;
  c.center_prime = {{0}, {0}};
  c.center_second = {{12}, {12}};
  c.epsilon_grid = {0.001, 0.002, 0.005};
  c.omega_samples = 10000;
  c.seed = 77;
  c.threads = 2;
  ShiftAction a;
  a.frequency = {0.0};
  c.action = a;
  const ExperimentResult r = run_iid_two_particle(c);
  CHECK(r.pass);
  // bound = 9^(3/2) * 9 * 2 eps = 243 * 2 eps
  CHECK(r.estimates[0].bound == doctest::Approx(243.0 * 0.002).epsilon(1e-9));
}

TEST_CASE("iid two-volume estimates are symmetric under swapping the cubes") {
  WegnerExperimentConfig c;
  c.mode = ExperimentMode::iid_2p_two_volume;
  c.d = 1;
  c.radius = 1;
  c.center_prime = {{0}, {0}};
  c.center_second = {{12}, {12}};
  c.epsilon_grid = {0.002, 0.01};
  c.omega_samples = 4000;
  c.seed = 99;
  ShiftAction a;
  a.frequency = {0.0};
  c.action = a;
  const ExperimentResult fwd = run_iid_two_particle(c);
  std::swap(c.center_prime, c.center_second);
  const ExperimentResult rev = run_iid_two_particle(c);
  for (std::size_t i = 0; i < fwd.estimates.size(); ++i)
    CHECK(fwd.estimates[i].p_hat == rev.estimates[i].p_hat);
}

TEST_CASE("qp one-volume experiment produces conditioning diagnostics") {
  const ExperimentResult r = run_qp_one_volume(qp1_config());
  CHECK(r.enclosing_radius == 4);  // ceil(2^2)
  CHECK(r.delta_n > 0.0);
  CHECK(r.separation_depth >= 1);
  CHECK(r.separation_depth == separation_level(r.delta_n));
  CHECK(r.coefficient_at_split > 0.0);
  CHECK(r.density_bound == doctest::Approx(1.0 / r.coefficient_at_split));
  CHECK(r.truncation_levels == 24);
  CHECK(exactly_monotone(r.estimates));
  for (const auto& e : r.estimates) CHECK(e.n_samples == 2000);
}

TEST_CASE("qp one-volume events are certain beyond the spectral range") {
  WegnerExperimentConfig c = qp1_config();
  c.omega_samples = 100;
  c.epsilon_grid = {50.0};  // wider than the whole spectrum plus |E|
  const ExperimentResult r = run_qp_one_volume(c);
  CHECK(r.estimates[0].p_hat == 1.0);
}

TEST_CASE("qp one-volume rejects truncations that cannot resolve the split") {
  WegnerExperimentConfig c = qp1_config();
  c.truncation_levels = 3;  // n0(4) + 4 is larger
  CHECK_THROWS_WITH_AS(run_qp_one_volume(c), doctest::Contains("n0(N) + 4"),
                       std::invalid_argument);
}

TEST_CASE("qp one-volume theta replicates stay valid; the spread is reported only") {
  // The probability is over omega at a fixed theta; replicate theta seeds
  // genuinely move the concentration level, so the difference is reported,
  // never asserted beyond validity.
  WegnerExperimentConfig c = qp1_config();
  c.epsilon_grid = {0.02, 0.05, 0.1};
  const ExperimentResult a = run_qp_one_volume(c);
  c.theta_seed = 7777;
  const ExperimentResult b = run_qp_one_volume(c);
  for (std::size_t i = 0; i < a.estimates.size(); ++i) {
    CHECK(a.estimates[i].p_hat >= 0.0);
    CHECK(b.estimates[i].p_hat <= 1.0);
    MESSAGE("theta replicate spread at eps = ", a.estimates[i].epsilon, ": ",
            std::abs(a.estimates[i].p_hat - b.estimates[i].p_hat));
  }
  CHECK(exactly_monotone(a.estimates));
  CHECK(exactly_monotone(b.estimates));
}

TEST_CASE("qp two-volume requires separation, reach, and enclosure") {
  WegnerExperimentConfig c;
  c.mode = ExperimentMode::qp_two_volume;
  c.d = 1;
  c.nu = 1;
  c.radius = 2;
  c.enclosing_exponent = 5.0;
  c.omega_samples = 10;
  c.center_prime = {{0}, {0}};

  c.center_second = {{0}, {0}};
  CHECK_THROWS_WITH_AS(run_qp_two_volume(c), doctest::Contains("separation requirement"),
                       std::invalid_argument);

  c.center_second = {{5}, {0}};  // exchange image at distance zero
  c.center_prime = {{0}, {5}};
  CHECK_THROWS_WITH_AS(run_qp_two_volume(c), doctest::Contains("separation requirement"),
                       std::invalid_argument);

  c.center_prime = {{0}, {0}};
  c.center_second = {{40}, {40}};  // beyond L^r = 32
  CHECK_THROWS_WITH_AS(run_qp_two_volume(c), doctest::Contains("L^r"), std::invalid_argument);
}

TEST_CASE("forced symmetric two-volume runs are trivially concentrated") {
  // center_second is the exchange image of center_prime: identical spectra,
  // so the distance is zero for every omega once separation is bypassed
  WegnerExperimentConfig c;
  c.mode = ExperimentMode::qp_two_volume;
  c.d = 1;
  c.nu = 1;
  c.radius = 2;
  c.enclosing_exponent = 2.0;
  c.omega_samples = 50;
  c.truncation_levels = 16;
  c.center_prime = {{0}, {3}};
  c.center_second = {{3}, {0}};
  c.allow_separation_violation = true;
  c.epsilon_grid = {1e-6, 1e-4, 1e-2};
  const ExperimentResult r = run_qp_two_volume(c);
  for (const auto& e : r.estimates) CHECK(e.p_hat == 1.0);
}

TEST_CASE("qp two-volume swap symmetry") {
  WegnerExperimentConfig c;
  c.mode = ExperimentMode::qp_two_volume;
  c.d = 1;
  c.nu = 1;
  c.radius = 2;
  c.enclosing_exponent = 5.0;
  c.omega_samples = 500;
  c.seed = 3;
  c.theta_seed = 3;
  c.truncation_levels = 24;
  c.center_prime = {{0}, {0}};
  c.center_second = {{20}, {20}};
  c.epsilon_grid = {1e-4, 1e-3, 1e-2};
  const ExperimentResult fwd = run_qp_two_volume(c);
  std::swap(c.center_prime, c.center_second);
  const ExperimentResult rev = run_qp_two_volume(c);
  for (std::size_t i = 0; i < fwd.estimates.size(); ++i)
    CHECK(fwd.estimates[i].p_hat == rev.estimates[i].p_hat);
}

TEST_CASE("classical experiment works in two lattice dimensions") {
  WegnerExperimentConfig c;
  c.mode = ExperimentMode::classical_1p;
  c.d = 2;
  c.radius = 1;
  c.energy = 0.5;
  c.epsilon_grid = {0.01, 0.05};
  c.omega_samples = 3000;
  c.seed = 21;
  c.threads = 2;
  ShiftAction a;
  a.dimension = 2;
  a.frequency = {0.0, 0.0};
  c.action = a;
  const ExperimentResult r = run_classical_wegner(c);
  // |Lambda| = 3^2
  CHECK(r.estimates[0].bound == doctest::Approx(9.0 * 0.01));
  CHECK(exactly_monotone(r.estimates));
  // In the band bulk the distance event is a window of length 2 eps, so
  // the sharp expected-count bound carries the window length; the per-eps
  // form reported in bound_diagnostic can genuinely fail here, and the
  // run flags exactly that.
  for (const auto& e : r.estimates) CHECK(e.ci_low <= 9.0 * 2.0 * e.epsilon);
}

TEST_CASE("qp one-volume experiment works on a two-dimensional torus") {
  WegnerExperimentConfig c;
  c.mode = ExperimentMode::qp_one_volume;
  c.d = 1;
  c.nu = 2;
  c.radius = 1;
  c.enclosing_exponent = 2.0;
  c.energy = 0.5;
  c.omega_samples = 500;
  c.seed = 5;
  c.theta_seed = 5;
  c.epsilon_grid = {0.01, 0.05, 0.1};
  ShiftAction a;
  a.dimension = 1;
  a.nu = 2;
  a.frequency = {(std::sqrt(5.0) - 1.0) / 2.0, std::sqrt(2.0) - 1.0};
  c.action = a;
  const ExperimentResult r = run_qp_one_volume(c);
  CHECK(r.separation_depth >= 1);
  CHECK(r.truncation_levels <= max_truncation_levels(2));
  CHECK(exactly_monotone(r.estimates));
  for (const auto& e : r.estimates) {
    CHECK(e.p_hat >= 0.0);
    CHECK(e.p_hat <= 1.0);
  }
}

TEST_CASE("epsilon-linearity persists at a larger radius on an informative grid") {
  WegnerExperimentConfig c;
  c.mode = ExperimentMode::qp_one_volume;
  c.d = 1;
  c.nu = 1;
  c.radius = 3;
  c.enclosing_exponent = 2.0;
  c.energy = 0.0;
  // the 49-level spectrum saturates the default grid, so probe below it
  c.epsilon_grid = {1e-4, 3.16e-4, 1e-3, 3.16e-3, 1e-2};
  c.omega_samples = 4000;
  c.seed = 12345;
  c.theta_seed = 777;
  c.threads = 2;
  const ExperimentResult r = run_qp_one_volume(c);
  REQUIRE(r.slope.has_value());
  CHECK(r.slope->slope > 0.8);
  CHECK(r.slope->slope < 1.2);
  CHECK(exactly_monotone(r.estimates));
}

TEST_CASE("config validation catches basic range errors") {
  WegnerExperimentConfig c = qp1_config();
  c.enclosing_exponent = 1.0;
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c = qp1_config();
  c.epsilon_grid = {0.1, 0.01};
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c = qp1_config();
  c.epsilon_grid = {0.0, 0.01};
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c = qp1_config();
  c.schedule.kappa = 1.0;
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
  c = qp1_config();
  c.omega_samples = 0;
  CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
}
