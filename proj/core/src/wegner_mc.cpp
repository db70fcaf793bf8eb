#include "qpwegner/wegner_mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qpwegner/parallel.hpp"
#include "qpwegner/rng.hpp"
#include "qpwegner/spectral.hpp"

namespace qpwegner {

namespace {

constexpr std::uint64_t kOmegaTag = 0x6f6d656761u;
constexpr std::uint64_t kIidTag = 0x696964u;

Spectrum solve(const HamiltonianMatrix& h, bool verify) {
  return verify ? eigenvalues_symmetric_checked(h) : eigenvalues_symmetric(h);
}

}  // namespace

std::string to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::classical_1p: return "classical-1p";
    case ExperimentMode::iid_2p_one_volume: return "iid-2p-one-volume";
    case ExperimentMode::iid_2p_two_volume: return "iid-2p-two-volume";
    case ExperimentMode::qp_one_volume: return "qp-one-volume";
    case ExperimentMode::qp_two_volume: return "qp-two-volume";
  }
  return "unknown";
}

namespace {

LatticeVector zeros(int d) { return LatticeVector(static_cast<std::size_t>(d), 0); }

void fill_center(CenterPair& pair, int d) {
  if (pair.first.empty()) pair.first = zeros(d);
  if (pair.second.empty()) pair.second = zeros(d);
}

std::vector<double> log_spaced(double lo, double hi, int points) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < points; ++i)
    grid.push_back(std::exp(llo + (lhi - llo) * i / (points - 1)));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

bool is_two_volume(ExperimentMode mode) {
  return mode == ExperimentMode::iid_2p_two_volume || mode == ExperimentMode::qp_two_volume;
}

bool is_qp(ExperimentMode mode) {
  return mode == ExperimentMode::qp_one_volume || mode == ExperimentMode::qp_two_volume;
}

// Fills defaulted fields and checks every mode requirement.
WegnerExperimentConfig prepared(const WegnerExperimentConfig& input) {
  WegnerExperimentConfig c = input;
  if (c.d < 1) throw std::invalid_argument("config: lattice dimension d must be >= 1");
  if (c.nu < 1) throw std::invalid_argument("config: torus dimension nu must be >= 1");
  if (c.radius < 0) throw std::invalid_argument("config: radius L must be >= 0");
  if (c.omega_samples < 1) throw std::invalid_argument("config: need at least one sample");
  if (c.threads < 1) throw std::invalid_argument("config: thread count must be >= 1");
  c.schedule.validate();
  c.action.validate();
  if (c.action.dimension != c.d || c.action.nu != c.nu)
    throw std::invalid_argument("config: shift action dimensions disagree with d, nu");
  if (c.interaction.range < 0)
    throw std::invalid_argument("config: interaction range must be >= 0");

  fill_center(c.center, c.d);
  fill_center(c.center_prime, c.d);
  fill_center(c.center_second, c.d);
  for (const auto* pair : {&c.center, &c.center_prime, &c.center_second}) {
    if (static_cast<int>(pair->first.size()) != c.d ||
        static_cast<int>(pair->second.size()) != c.d)
      throw std::invalid_argument("config: center components must have d entries each");
  }

  if (c.epsilon_grid.empty()) {
    switch (c.mode) {
      case ExperimentMode::classical_1p:
      case ExperimentMode::iid_2p_one_volume:
      case ExperimentMode::iid_2p_two_volume:
        c.epsilon_grid = {0.002, 0.005, 0.01, 0.02};
        break;
      case ExperimentMode::qp_one_volume:
        c.epsilon_grid = log_spaced(1e-3, 1e-1, 9);
        break;
      case ExperimentMode::qp_two_volume:
        c.epsilon_grid = log_spaced(1e-5, 1e-3, 9);
        break;
    }
  }
  for (double eps : c.epsilon_grid)
    if (!(eps > 0.0)) throw std::invalid_argument("config: epsilon grid must be positive");
  if (!std::is_sorted(c.epsilon_grid.begin(), c.epsilon_grid.end()))
    throw std::invalid_argument("config: epsilon grid must be ascending");

  if (is_qp(c.mode)) {
    if (c.radius < 1) throw std::invalid_argument("config: quasi-periodic modes need L >= 1");
    if (!(c.enclosing_exponent > 1.0))
      throw std::invalid_argument("config: enclosing exponent r must exceed 1");
    if (!(c.theta_budget_exponent > 0.0))
      throw std::invalid_argument("config: exponent b must be positive");
  }

  if (is_two_volume(c.mode)) {
    if (!c.allow_separation_violation &&
        !separation_ok(c.center_prime, c.center_second, c.radius)) {
      const double dist = std::min(center_distance(c.center_prime, c.center_second),
                                   center_distance(c.center_prime, exchange(c.center_second)));
      throw std::invalid_argument(
          "config: two-volume centers too close: min over the exchange symmetry of the "
          "center distance is " + std::to_string(dist) + ", but the separation requirement "
          "demands more than 8L = " + std::to_string(8 * c.radius));
    }
  }

  if (c.mode == ExperimentMode::qp_two_volume) {
    const double dist = center_distance(c.center_prime, c.center_second);
    const double reach = std::pow(static_cast<double>(c.radius), c.enclosing_exponent);
    if (dist > reach)
      throw std::invalid_argument(
          "config: two-volume centers out of reach: |u' - u''| = " + std::to_string(dist) +
          " exceeds L^r = " + std::to_string(reach) + " (enclosing box requirement)");
  }
  return c;
}

TorusPoint sample_omega(std::uint64_t seed, std::int64_t index, int nu) {
  std::vector<double> coords(static_cast<std::size_t>(nu));
  for (int cidx = 0; cidx < nu; ++cidx)
    coords[static_cast<std::size_t>(cidx)] = keyed_unit(
        seed, {kOmegaTag, static_cast<std::uint64_t>(index), static_cast<std::uint64_t>(cidx)});
  return TorusPoint(std::move(coords));
}

// Thresholds the same distance samples over the whole grid, which makes
// p_hat exactly monotone in epsilon.
std::vector<ConcentrationEstimate> concentration_table(std::vector<double> dists,
                                                       const std::vector<double>& grid,
                                                       const std::vector<double>& bounds) {
  std::sort(dists.begin(), dists.end());
  const auto n = static_cast<std::int64_t>(dists.size());
  std::vector<ConcentrationEstimate> out;
  out.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double eps = grid[g];
    const std::int64_t hits =
        std::upper_bound(dists.begin(), dists.end(), eps) - dists.begin();
    const ConfidenceInterval ci = wilson_interval(hits, n);
    ConcentrationEstimate e;
    e.epsilon = eps;
    e.p_hat = static_cast<double>(hits) / static_cast<double>(n);
    e.ci_low = ci.low;
    e.ci_high = ci.high;
    e.n_samples = n;
    e.bound = bounds[g];
    out.push_back(e);
  }
  return out;
}

bool bounds_respected(const std::vector<ConcentrationEstimate>& estimates) {
  for (const auto& e : estimates)
    if (e.ci_low > e.bound) return false;
  return true;
}

double envelope_constant(const std::vector<ConcentrationEstimate>& estimates,
                         const std::vector<double>& shapes) {
  double c = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i)
    if (shapes[i] > 0.0) c = std::max(c, estimates[i].p_hat / shapes[i]);
  return c;
}

// Enclosing one-particle box Lambda_N(v): N = ceil(L^r), v the midpoint of
// the bounding box of the given shadow sites. Throws when a site escapes.
struct Enclosure {
  LatticeCube box;
  double delta = 0.0;
  int split_depth = 0;  // n0(N)
};

Enclosure make_enclosure(const std::vector<LatticeVector>& shadow_sites,
                         const WegnerExperimentConfig& c) {
  const int d = c.d;
  const int n_radius = static_cast<int>(
      std::ceil(std::pow(static_cast<double>(c.radius), c.enclosing_exponent)));
  LatticeVector lo = shadow_sites.front(), hi = shadow_sites.front();
  for (const auto& s : shadow_sites)
    for (int a = 0; a < d; ++a) {
      lo[static_cast<std::size_t>(a)] = std::min(lo[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(a)]);
      hi[static_cast<std::size_t>(a)] = std::max(hi[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(a)]);
    }
  LatticeVector v(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a)
    v[static_cast<std::size_t>(a)] = static_cast<int>(std::floor(
        (static_cast<double>(lo[static_cast<std::size_t>(a)]) + hi[static_cast<std::size_t>(a)]) / 2.0));
  Enclosure enc;
  enc.box = LatticeCube{v, n_radius};
  for (const auto& s : shadow_sites)
    if (!enc.box.contains(s))
      throw std::invalid_argument(
          "config: a shadow site falls outside the enclosing box Lambda_N(v) with N = ceil(L^r); "
          "increase the enclosing exponent r");
  const TorusPoint origin(std::vector<double>(static_cast<std::size_t>(c.nu), 0.0));
  enc.delta = min_spacing(c.action, origin, enc.box);
  enc.split_depth = separation_level(enc.delta);
  return enc;
}

int resolve_truncation(const WegnerExperimentConfig& c, int required_min) {
  if (c.truncation_levels == 0)
    return default_truncation_levels(c.schedule, c.nu, required_min);
  if (c.truncation_levels < required_min)
    throw std::invalid_argument(
        "config: truncation depth " + std::to_string(c.truncation_levels) +
        " cannot resolve the conditional split: need at least n0(N) + 4 = " +
        std::to_string(required_min) + " levels");
  if (c.truncation_levels > max_truncation_levels(c.nu))
    throw std::invalid_argument("config: truncation exceeds the representable depth " +
                                std::to_string(max_truncation_levels(c.nu)));
  return c.truncation_levels;
}

void fill_qp_diagnostics(ExperimentResult& result, const Enclosure& enc,
                         const WegnerExperimentConfig& c, int truncation) {
  result.enclosing_radius = enc.box.radius;
  result.enclosing_center = enc.box.center;
  result.delta_n = enc.delta;
  result.separation_depth = enc.split_depth;
  result.coefficient_at_split =
      coefficient(c.schedule, static_cast<std::uint64_t>(enc.split_depth));
  result.density_bound = conditional_density_bound(c.schedule, enc.split_depth);
  result.truncation_levels = truncation;
  result.truncation_tail = tail_bound(c.schedule, static_cast<std::uint64_t>(truncation));
}

void finish_qp_result(ExperimentResult& result, const std::vector<double>& log_shapes,
                      const std::vector<double>& power_shapes) {
  result.fitted_log_constant = envelope_constant(result.estimates, log_shapes);
  result.fitted_power_constant = envelope_constant(result.estimates, power_shapes);
  try {
    result.slope = fit_epsilon_slope(result.estimates);
  } catch (const std::invalid_argument&) {
    result.slope.reset();
  }
  result.pass_criterion = "log-log slope of p_hat vs epsilon within [" +
                          std::to_string(kSlopeWindowLow) + ", " +
                          std::to_string(kSlopeWindowHigh) + "]";
  result.pass = result.slope.has_value() && result.slope->slope >= kSlopeWindowLow &&
                result.slope->slope <= kSlopeWindowHigh;
}

}  // namespace

void validate_config(const WegnerExperimentConfig& config) { (void)prepared(config); }

WegnerExperimentConfig finalize_config(const WegnerExperimentConfig& config) {
  return prepared(config);
}

ExperimentResult run_classical_wegner(const WegnerExperimentConfig& input) {
  WegnerExperimentConfig c = prepared(input);
  if (c.mode != ExperimentMode::classical_1p)
    throw std::invalid_argument("run_classical_wegner: wrong mode");
  const LatticeCube cube{zeros(c.d), c.radius};
  const auto sites = cube.sites();
  const auto volume = static_cast<double>(cube.site_count());

  std::vector<double> dists(static_cast<std::size_t>(c.omega_samples));
  parallel_for(c.omega_samples, c.threads, [&](std::int64_t i) {
    std::map<LatticeVector, double> values;
    for (std::size_t j = 0; j < sites.size(); ++j)
      values[sites[j]] = keyed_unit(
          c.seed, {kIidTag, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
    const Spectrum s = solve(assemble_one_particle(cube, values), c.verify_eigen);
    dists[static_cast<std::size_t>(i)] = dist_to_energy(s, c.energy);
  });

  std::vector<double> bounds;
  bounds.reserve(c.epsilon_grid.size());
  for (double eps : c.epsilon_grid) bounds.push_back(volume * eps);

  ExperimentResult result;
  result.mode = c.mode;
  result.estimates = concentration_table(std::move(dists), c.epsilon_grid, bounds);
  result.pass_criterion = "ci_low <= |Lambda| * eps at every grid point";
  result.pass = bounds_respected(result.estimates);
  return result;
}

ExperimentResult run_iid_two_particle(const WegnerExperimentConfig& input) {
  WegnerExperimentConfig c = prepared(input);
  const bool two_volume = c.mode == ExperimentMode::iid_2p_two_volume;
  if (c.mode != ExperimentMode::iid_2p_one_volume && !two_volume)
    throw std::invalid_argument("run_iid_two_particle: wrong mode");

  const TwoParticleCube cube_a =
      two_volume ? TwoParticleCube{c.center_prime.first, c.center_prime.second, c.radius}
                 : TwoParticleCube{c.center.first, c.center.second, c.radius};
  const TwoParticleCube cube_b{c.center_second.first, c.center_second.second, c.radius};

  // One IID field over the union of the shadows; each site keyed by its
  // rank in the sorted union.
  std::vector<LatticeVector> field_sites = shadow(cube_a);
  if (two_volume) {
    const auto more = shadow(cube_b);
    field_sites.insert(field_sites.end(), more.begin(), more.end());
    std::sort(field_sites.begin(), field_sites.end());
    field_sites.erase(std::unique(field_sites.begin(), field_sites.end()), field_sites.end());
  }

  std::vector<double> dists(static_cast<std::size_t>(c.omega_samples));
  parallel_for(c.omega_samples, c.threads, [&](std::int64_t i) {
    std::map<LatticeVector, double> values;
    for (std::size_t j = 0; j < field_sites.size(); ++j)
      values[field_sites[j]] = keyed_unit(
          c.seed, {kIidTag, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
    const Spectrum sa = solve(assemble_two_particle(cube_a, values, c.interaction), c.verify_eigen);
    if (two_volume) {
      const Spectrum sb =
          solve(assemble_two_particle(cube_b, values, c.interaction), c.verify_eigen);
      dists[static_cast<std::size_t>(i)] = dist_between_spectra(sa, sb);
    } else {
      dists[static_cast<std::size_t>(i)] = dist_to_energy(sa, c.energy);
    }
  });

  const double volume = static_cast<double>(cube_a.dimension());
  std::vector<double> bounds;
  bounds.reserve(c.epsilon_grid.size());
  for (double eps : c.epsilon_grid) {
    const double s2eps = std::min(2.0 * eps, 1.0);
    double b = std::pow(volume, 1.5) * s2eps;
    if (two_volume) b *= static_cast<double>(cube_b.dimension());
    bounds.push_back(b);
  }

  ExperimentResult result;
  result.mode = c.mode;
  result.estimates = concentration_table(std::move(dists), c.epsilon_grid, bounds);
  result.pass_criterion = two_volume
                              ? "ci_low <= |Lambda|^(3/2) * |Lambda'| * s(2 eps) at every grid point"
                              : "ci_low <= |Lambda|^(3/2) * s(2 eps) at every grid point";
  result.pass = bounds_respected(result.estimates);
  return result;
}

ExperimentResult run_qp_one_volume(const WegnerExperimentConfig& input) {
  WegnerExperimentConfig c = prepared(input);
  if (c.mode != ExperimentMode::qp_one_volume)
    throw std::invalid_argument("run_qp_one_volume: wrong mode");

  const TwoParticleCube cube{c.center.first, c.center.second, c.radius};
  const Enclosure enc = make_enclosure(shadow(cube), c);
  const int truncation = resolve_truncation(c, enc.split_depth + 4);
  const RandeletteField field =
      RandeletteField::make(c.schedule, ThetaSample::keyed(c.theta_seed), c.nu, truncation);

  std::vector<double> dists(static_cast<std::size_t>(c.omega_samples));
  parallel_for(c.omega_samples, c.threads, [&](std::int64_t i) {
    const TorusPoint omega = sample_omega(c.seed, i, c.nu);
    const Spectrum s =
        solve(assemble_two_particle(cube, field, c.action, omega, c.interaction), c.verify_eigen);
    dists[static_cast<std::size_t>(i)] = dist_to_energy(s, c.energy);
  });

  const double log_factor =
      std::pow(std::log(static_cast<double>(enc.box.radius)), c.schedule.m_exponent) *
      std::pow(static_cast<double>(c.radius), 3.0 * c.d);
  const double power_factor = std::pow(
      static_cast<double>(c.radius),
      c.schedule.m_exponent + c.theta_budget_exponent + 3.0 * c.d + c.enclosing_exponent);
  std::vector<double> log_shapes, power_shapes;
  for (double eps : c.epsilon_grid) {
    log_shapes.push_back(log_factor * eps);
    power_shapes.push_back(power_factor * eps);
  }

  ExperimentResult result;
  result.mode = c.mode;
  result.estimates = concentration_table(std::move(dists), c.epsilon_grid, log_shapes);
  fill_qp_diagnostics(result, enc, c, truncation);
  finish_qp_result(result, log_shapes, power_shapes);
  return result;
}

ExperimentResult run_qp_two_volume(const WegnerExperimentConfig& input) {
  WegnerExperimentConfig c = prepared(input);
  if (c.mode != ExperimentMode::qp_two_volume)
    throw std::invalid_argument("run_qp_two_volume: wrong mode");

  const TwoParticleCube cube_a{c.center_prime.first, c.center_prime.second, c.radius};
  const TwoParticleCube cube_b{c.center_second.first, c.center_second.second, c.radius};
  std::vector<LatticeVector> union_shadow = shadow(cube_a);
  {
    const auto more = shadow(cube_b);
    union_shadow.insert(union_shadow.end(), more.begin(), more.end());
    std::sort(union_shadow.begin(), union_shadow.end());
    union_shadow.erase(std::unique(union_shadow.begin(), union_shadow.end()),
                       union_shadow.end());
  }
  const Enclosure enc = make_enclosure(union_shadow, c);
  const int truncation = resolve_truncation(c, enc.split_depth + 4);
  const RandeletteField field =
      RandeletteField::make(c.schedule, ThetaSample::keyed(c.theta_seed), c.nu, truncation);

  std::vector<double> dists(static_cast<std::size_t>(c.omega_samples));
  parallel_for(c.omega_samples, c.threads, [&](std::int64_t i) {
    const TorusPoint omega = sample_omega(c.seed, i, c.nu);
    const Spectrum sa =
        solve(assemble_two_particle(cube_a, field, c.action, omega, c.interaction), c.verify_eigen);
    const Spectrum sb =
        solve(assemble_two_particle(cube_b, field, c.action, omega, c.interaction), c.verify_eigen);
    dists[static_cast<std::size_t>(i)] = dist_between_spectra(sa, sb);
  });

  const double log_factor =
      std::pow(static_cast<double>(c.radius), 5.0 * c.d) *
      std::pow(std::log(static_cast<double>(enc.box.radius)), c.schedule.m_exponent);
  const double power_factor = std::pow(
      static_cast<double>(c.radius),
      c.schedule.m_exponent + c.theta_budget_exponent + c.enclosing_exponent + 5.0 * c.d);
  std::vector<double> log_shapes, power_shapes;
  for (double eps : c.epsilon_grid) {
    log_shapes.push_back(log_factor * eps);
    power_shapes.push_back(power_factor * eps);
  }

  ExperimentResult result;
  result.mode = c.mode;
  result.estimates = concentration_table(std::move(dists), c.epsilon_grid, log_shapes);
  fill_qp_diagnostics(result, enc, c, truncation);
  finish_qp_result(result, log_shapes, power_shapes);
  return result;
}

ExperimentResult run_experiment(const WegnerExperimentConfig& config) {
  switch (config.mode) {
    case ExperimentMode::classical_1p: return run_classical_wegner(config);
    case ExperimentMode::iid_2p_one_volume:
    case ExperimentMode::iid_2p_two_volume: return run_iid_two_particle(config);
    case ExperimentMode::qp_one_volume: return run_qp_one_volume(config);
    case ExperimentMode::qp_two_volume: return run_qp_two_volume(config);
  }
  throw std::invalid_argument("run_experiment: unknown mode");
}

HamiltonianMatrix first_sample_matrix(const WegnerExperimentConfig& input) {
  const WegnerExperimentConfig c = prepared(input);
  if (c.mode == ExperimentMode::classical_1p) {
    const LatticeCube cube{zeros(c.d), c.radius};
    const auto sites = cube.sites();
    std::map<LatticeVector, double> values;
    for (std::size_t j = 0; j < sites.size(); ++j)
      values[sites[j]] = keyed_unit(c.seed, {kIidTag, 0, static_cast<std::uint64_t>(j)});
    return assemble_one_particle(cube, values);
  }
  if (c.mode == ExperimentMode::iid_2p_one_volume ||
      c.mode == ExperimentMode::iid_2p_two_volume) {
    const bool two_volume = c.mode == ExperimentMode::iid_2p_two_volume;
    const TwoParticleCube cube =
        two_volume ? TwoParticleCube{c.center_prime.first, c.center_prime.second, c.radius}
                   : TwoParticleCube{c.center.first, c.center.second, c.radius};
    std::vector<LatticeVector> field_sites = shadow(cube);
    if (two_volume) {
      const auto more = shadow(TwoParticleCube{c.center_second.first, c.center_second.second,
                                               c.radius});
      field_sites.insert(field_sites.end(), more.begin(), more.end());
      std::sort(field_sites.begin(), field_sites.end());
      field_sites.erase(std::unique(field_sites.begin(), field_sites.end()), field_sites.end());
    }
    std::map<LatticeVector, double> values;
    for (std::size_t j = 0; j < field_sites.size(); ++j)
      values[field_sites[j]] = keyed_unit(c.seed, {kIidTag, 0, static_cast<std::uint64_t>(j)});
    return assemble_two_particle(cube, values, c.interaction);
  }
  const bool two_volume = c.mode == ExperimentMode::qp_two_volume;
  const TwoParticleCube cube =
      two_volume ? TwoParticleCube{c.center_prime.first, c.center_prime.second, c.radius}
                 : TwoParticleCube{c.center.first, c.center.second, c.radius};
  std::vector<LatticeVector> union_shadow = shadow(cube);
  if (two_volume) {
    const auto more =
        shadow(TwoParticleCube{c.center_second.first, c.center_second.second, c.radius});
    union_shadow.insert(union_shadow.end(), more.begin(), more.end());
    std::sort(union_shadow.begin(), union_shadow.end());
    union_shadow.erase(std::unique(union_shadow.begin(), union_shadow.end()),
                       union_shadow.end());
  }
  const Enclosure enc = make_enclosure(union_shadow, c);
  const int truncation = resolve_truncation(c, enc.split_depth + 4);
  const RandeletteField field =
      RandeletteField::make(c.schedule, ThetaSample::keyed(c.theta_seed), c.nu, truncation);
  const TorusPoint omega = sample_omega(c.seed, 0, c.nu);
  return assemble_two_particle(cube, field, c.action, omega, c.interaction);
}

}  // namespace qpwegner
