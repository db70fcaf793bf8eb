#include "qpwegner/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qpwegner/dm_stollmann.hpp"
#include "qpwegner/parallel.hpp"
#include "qpwegner/rng.hpp"
#include "qpwegner/spectral.hpp"

namespace qpwegner::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---------- formatting ----------

std::string fmt_double(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt_g12(double v) { return fmt_double(v, "%.12g"); }
std::string fmt_g17(double v) { return fmt_double(v, "%.17g"); }

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt_g17(values[i]);
  }
  return out;
}

std::string join_ints(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

// ---------- key/value access ----------

using Kv = std::map<std::string, std::string>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

void require_known_keys(const Kv& kv, const std::set<std::string>& allowed,
                        const std::string& subcommand) {
  for (const auto& [key, value] : kv) {
    (void)value;
    if (!allowed.count(key))
      throw std::invalid_argument("config: unknown key '" + key + "' for subcommand '" +
                                  subcommand + "'");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' must be a number, got '" + value + "'");
  }
}

std::int64_t to_i64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' must be an integer, got '" + value +
                                "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key + "' must be a nonnegative integer, got '" +
                                value + "'");
  }
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(trim(item));
  return parts;
}

std::vector<double> to_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& part : split_list(value)) out.push_back(to_double(key, part));
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  for (const auto& part : split_list(value))
    out.push_back(static_cast<int>(to_i64(key, part)));
  return out;
}

template <typename T, typename Fn>
T get_or(const Kv& kv, const std::string& key, T fallback, Fn&& convert) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  return convert(key, it->second);
}

double get_double(const Kv& kv, const std::string& key, double fallback) {
  return get_or(kv, key, fallback, to_double);
}
int get_int(const Kv& kv, const std::string& key, int fallback) {
  return static_cast<int>(get_or<std::int64_t>(kv, key, fallback, to_i64));
}
std::int64_t get_i64(const Kv& kv, const std::string& key, std::int64_t fallback) {
  return get_or(kv, key, fallback, to_i64);
}
std::uint64_t get_u64(const Kv& kv, const std::string& key, std::uint64_t fallback) {
  return get_or(kv, key, fallback, to_u64);
}
std::string get_string(const Kv& kv, const std::string& key, std::string fallback) {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

// ---------- shared config fragments ----------

ShiftAction action_from_kv(const Kv& kv, int d, int nu) {
  ShiftAction action;
  action.dimension = d;
  action.nu = nu;
  auto it = kv.find("alpha");
  if (it != kv.end()) {
    action.frequency = to_double_list("alpha", it->second);
    if (action.frequency.size() != static_cast<std::size_t>(nu) * static_cast<std::size_t>(d))
      throw std::invalid_argument("config: alpha must list nu*d entries (row-major)");
    std::cerr << "note: custom frequency matrix supplied; its Diophantine quality is the "
                 "caller's responsibility\n";
  } else if (d == 1 && nu == 1) {
    action = ShiftAction::golden_mean_1d();
  } else {
    throw std::invalid_argument(
        "config: alpha is required when d or nu differs from 1 (no default frequency)");
  }
  if (kv.count("diophantine_b"))
    action.diophantine_b = to_double("diophantine_b", kv.at("diophantine_b"));
  return action;
}

// Placeholder action for the IID modes, which never evaluate the shift.
ShiftAction trivial_action(int d) {
  ShiftAction action;
  action.dimension = d;
  action.nu = 1;
  action.frequency.assign(static_cast<std::size_t>(d), 0.0);
  return action;
}

CenterPair center_from_kv(const Kv& kv, const std::string& key, int d) {
  auto it = kv.find(key);
  if (it == kv.end()) return {};
  const auto parts = to_int_list(key, it->second);
  if (parts.size() != static_cast<std::size_t>(2 * d))
    throw std::invalid_argument("config: key '" + key + "' must list 2d integers");
  CenterPair pair;
  pair.first.assign(parts.begin(), parts.begin() + d);
  pair.second.assign(parts.begin() + d, parts.end());
  return pair;
}

std::string center_echo(const CenterPair& pair) {
  std::vector<int> all(pair.first);
  all.insert(all.end(), pair.second.begin(), pair.second.end());
  return join_ints(all);
}

CoefficientSchedule schedule_from_kv(const Kv& kv) {
  CoefficientSchedule s;
  s.kappa = get_double(kv, "kappa", s.kappa);
  s.m_exponent = get_double(kv, "m_exponent", s.kappa);
  s.c_upper = get_double(kv, "c_upper", s.c_upper);
  s.c_lower = get_double(kv, "c_lower", std::min(s.c_lower, s.c_upper));
  s.sign = get_int(kv, "sign", s.sign);
  s.validate();
  return s;
}

InteractionSpec interaction_from_kv(const Kv& kv) {
  InteractionSpec u;
  u.strength = get_double(kv, "interaction_strength", u.strength);
  u.range = get_int(kv, "interaction_range", u.range);
  return u;
}

// ---------- artifacts ----------

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
  }
  fs::rename(tmp, path);
}

std::string concentration_csv(const std::vector<ConcentrationEstimate>& estimates) {
  std::string csv = "epsilon,p_hat,ci_low,ci_high,n_samples,bound_diagnostic\n";
  for (const auto& e : estimates) {
    csv += fmt_g12(e.epsilon) + ',' + fmt_g12(e.p_hat) + ',' + fmt_g12(e.ci_low) + ',' +
           fmt_g12(e.ci_high) + ',' + std::to_string(e.n_samples) + ',' + fmt_g12(e.bound) +
           '\n';
  }
  return csv;
}

json estimates_json(const std::vector<ConcentrationEstimate>& estimates) {
  json rows = json::array();
  for (const auto& e : estimates) {
    rows.push_back({{"epsilon", e.epsilon},
                    {"p_hat", e.p_hat},
                    {"ci_low", e.ci_low},
                    {"ci_high", e.ci_high},
                    {"n_samples", e.n_samples},
                    {"bound_diagnostic", e.bound}});
  }
  return rows;
}

struct RunOutcome {
  bool pass = false;
  std::string csv;
  json summary;
  Kv echo;               // effective config, reproducible
  std::string matrix;    // optional dense dump of the first-sample matrix
};

// Thread count goes into the manifest (it is a config key) but never into
// the JSON summary: results are identical at any thread count.
json params_json(const Kv& echo) {
  json j = json::object();
  for (const auto& [key, value] : echo)
    if (key != "threads") j[key] = value;
  return j;
}

std::string manifest_text(const std::string& subcommand, const RunOutcome& outcome,
                          const HarnessOptions& options, double wall_seconds,
                          const fs::path& csv_path, const fs::path& json_path) {
  std::string text;
  text += "# qpwegner run manifest; valid config for: " + subcommand + "\n";
  for (const auto& [key, value] : outcome.echo) text += key + " = " + value + "\n";
  text += "# metadata: version = " + std::string(kVersion) + "\n";
  text += "# metadata: out_dir = " + options.out_dir + "\n";
  text += "# metadata: verify_eigen = " + std::to_string(options.verify_eigen ? 1 : 0) + "\n";
  text += "# metadata: wall_clock_s = " + fmt_g12(wall_seconds) + "\n";
  text += "# metadata: csv = " + csv_path.string() + "\n";
  text += "# metadata: json = " + json_path.string() + "\n";
  text += "# metadata: pass = " + std::to_string(outcome.pass ? 1 : 0) + "\n";
  return text;
}

// ---------- wegner experiment subcommands ----------

const std::set<std::string> kClassicalKeys = {"d",    "l",       "energy", "epsilon_grid",
                                              "omega_samples", "seed", "threads",
                                              "dump_matrix"};
const std::set<std::string> kIid2pKeys = {
    "d",  "l",      "volumes",      "energy",        "epsilon_grid",
    "omega_samples", "seed", "threads", "center", "center_prime", "center_second",
    "interaction_strength", "interaction_range", "dump_matrix"};
const std::set<std::string> kQp1Keys = {
    "d", "nu", "alpha", "diophantine_b", "l", "r", "b", "energy", "epsilon_grid",
    "omega_samples", "seed", "theta_seed", "threads", "center", "interaction_strength",
    "interaction_range", "kappa", "m_exponent", "c_upper", "c_lower", "sign",
    "truncation_levels", "dump_matrix"};
const std::set<std::string> kQp2Keys = {
    "d", "nu", "alpha", "diophantine_b", "l", "r", "b", "epsilon_grid", "omega_samples",
    "seed", "theta_seed", "threads", "center_prime", "center_second",
    "interaction_strength", "interaction_range",
    "kappa", "m_exponent", "c_upper", "c_lower", "sign", "truncation_levels", "dump_matrix"};

Kv wegner_echo(const WegnerExperimentConfig& c, const std::string& subcommand,
               bool dump_matrix) {
  Kv echo;
  echo["d"] = std::to_string(c.d);
  echo["l"] = std::to_string(c.radius);
  echo["epsilon_grid"] = join_doubles(c.epsilon_grid);
  echo["omega_samples"] = std::to_string(c.omega_samples);
  echo["seed"] = std::to_string(c.seed);
  echo["threads"] = std::to_string(c.threads);
  echo["dump_matrix"] = dump_matrix ? "1" : "0";
  if (subcommand == "wegner-classical" || subcommand == "wegner-iid2p" ||
      subcommand == "wegner-qp1")
    echo["energy"] = fmt_g17(c.energy);
  if (subcommand == "wegner-iid2p" || subcommand == "wegner-qp1" || subcommand == "wegner-qp2") {
    echo["interaction_strength"] = fmt_g17(c.interaction.strength);
    echo["interaction_range"] = std::to_string(c.interaction.range);
  }
  if (subcommand == "wegner-iid2p") {
    echo["volumes"] = c.mode == ExperimentMode::iid_2p_two_volume ? "two" : "one";
    if (c.mode == ExperimentMode::iid_2p_two_volume) {
      echo["center_prime"] = center_echo(c.center_prime);
      echo["center_second"] = center_echo(c.center_second);
    } else {
      echo["center"] = center_echo(c.center);
    }
  }
  if (subcommand == "wegner-qp1" || subcommand == "wegner-qp2") {
    echo["nu"] = std::to_string(c.nu);
    echo["alpha"] = join_doubles(c.action.frequency);
    if (c.action.diophantine_b) echo["diophantine_b"] = fmt_g17(*c.action.diophantine_b);
    echo["r"] = fmt_g17(c.enclosing_exponent);
    echo["b"] = fmt_g17(c.theta_budget_exponent);
    echo["theta_seed"] = std::to_string(c.theta_seed);
    echo["kappa"] = fmt_g17(c.schedule.kappa);
    echo["m_exponent"] = fmt_g17(c.schedule.m_exponent);
    echo["c_upper"] = fmt_g17(c.schedule.c_upper);
    echo["c_lower"] = fmt_g17(c.schedule.c_lower);
    echo["sign"] = std::to_string(c.schedule.sign);
    echo["truncation_levels"] = std::to_string(c.truncation_levels);
    if (subcommand == "wegner-qp1") echo["center"] = center_echo(c.center);
    if (subcommand == "wegner-qp2") {
      echo["center_prime"] = center_echo(c.center_prime);
      echo["center_second"] = center_echo(c.center_second);
    }
  }
  return echo;
}

// Dense text dump of the first-sample Hamiltonian: "dim n" then n rows of
// n space-separated entries.
std::string matrix_text(const HamiltonianMatrix& m) {
  std::string text = "dim " + std::to_string(m.dimension()) + "\n";
  for (int i = 0; i < m.dimension(); ++i) {
    for (int j = 0; j < m.dimension(); ++j) {
      if (j) text += ' ';
      text += fmt_g17(m.at(i, j));
    }
    text += '\n';
  }
  return text;
}

RunOutcome run_wegner(const std::string& subcommand, const WegnerExperimentConfig& config,
                      bool dump_matrix) {
  const ExperimentResult result = run_experiment(config);
  RunOutcome outcome;
  outcome.pass = result.pass;
  outcome.csv = concentration_csv(result.estimates);
  outcome.echo = wegner_echo(config, subcommand, dump_matrix);
  if (dump_matrix) outcome.matrix = matrix_text(first_sample_matrix(config));

  json j;
  j["artifact"] = "qpwegner";
  j["version"] = kVersion;
  j["subcommand"] = subcommand;
  j["mode"] = to_string(result.mode);
  j["pass"] = result.pass;
  j["pass_criterion"] = result.pass_criterion;
  j["params"] = params_json(outcome.echo);
  j["estimates"] = estimates_json(result.estimates);
  if (result.mode == ExperimentMode::qp_one_volume ||
      result.mode == ExperimentMode::qp_two_volume) {
    json diag;
    diag["enclosing_radius"] = result.enclosing_radius;
    diag["enclosing_center"] = result.enclosing_center;
    diag["trajectory_spacing"] = result.delta_n;
    diag["separation_depth"] = result.separation_depth;
    diag["coefficient_at_split"] = result.coefficient_at_split;
    diag["conditional_density_bound"] = result.density_bound;
    diag["truncation_levels"] = result.truncation_levels;
    diag["truncation_tail"] = result.truncation_tail;
    diag["fitted_log_constant"] = result.fitted_log_constant;
    diag["fitted_power_constant"] = result.fitted_power_constant;
    if (result.slope) {
      diag["slope"] = result.slope->slope;
      diag["slope_se"] = result.slope->slope_se;
      diag["intercept"] = result.slope->intercept;
      diag["slope_points_used"] = result.slope->points_used;
    }
    j["diagnostics"] = diag;
  }
  outcome.summary = j;
  return outcome;
}

// ---------- other subcommands ----------

const std::set<std::string> kSpacingKeys = {"d", "nu", "alpha", "diophantine_b",
                                            "l_values"};

RunOutcome run_spacing(const Kv& kv) {
  require_known_keys(kv, kSpacingKeys, "spacing");
  const int d = get_int(kv, "d", 1);
  const int nu = get_int(kv, "nu", 1);
  const ShiftAction action = action_from_kv(kv, d, nu);
  std::vector<int> radii = {2, 4, 8, 16, 32, 64, 128, 256, 512};
  if (kv.count("l_values")) radii = to_int_list("l_values", kv.at("l_values"));
  for (int radius : radii)
    if (radius < 1) throw std::invalid_argument("config: l_values must all be >= 1");

  const SpacingTable table = estimate_diophantine(action, radii);

  RunOutcome outcome;
  outcome.echo["d"] = std::to_string(d);
  outcome.echo["nu"] = std::to_string(nu);
  outcome.echo["alpha"] = join_doubles(action.frequency);
  if (action.diophantine_b) outcome.echo["diophantine_b"] = fmt_g17(*action.diophantine_b);
  outcome.echo["l_values"] = join_ints(radii);

  std::string csv = "L,delta,delta_times_L\n";
  for (std::size_t i = 0; i < table.radii.size(); ++i)
    csv += std::to_string(table.radii[i]) + ',' + fmt_g12(table.deltas[i]) + ',' +
           fmt_g12(table.deltas[i] * table.radii[i]) + '\n';
  outcome.csv = csv;

  bool pass = table.min_delta_times_l > 0.0;
  if (action.diophantine_b)
    pass = pass && std::abs(table.fitted_b - *action.diophantine_b) <= 0.1;
  outcome.pass = pass;

  json j;
  j["artifact"] = "qpwegner";
  j["version"] = kVersion;
  j["subcommand"] = "spacing";
  j["pass"] = pass;
  j["params"] = params_json(outcome.echo);
  j["fitted_b"] = table.fitted_b;
  j["fitted_c"] = table.fitted_c;
  j["min_delta_times_l"] = table.min_delta_times_l;
  if (action.diophantine_b) j["expected_b"] = *action.diophantine_b;
  outcome.summary = j;
  return outcome;
}

const std::set<std::string> kStollmannKeys = {
    "functional", "j_size", "d", "l", "center", "interaction_strength", "interaction_range",
    "eigenvalue_index", "interval_center", "epsilon_grid", "samples", "seed", "threads"};

RunOutcome run_stollmann(const Kv& kv) {
  require_known_keys(kv, kStollmannKeys, "stollmann");
  const std::string functional = get_string(kv, "functional", "mean");
  const std::int64_t samples = get_i64(kv, "samples", 100000);
  const std::uint64_t seed = get_u64(kv, "seed", 12345);
  const int threads = get_int(kv, "threads", 1);
  std::vector<double> widths = {0.05, 0.1, 0.2};
  if (kv.count("epsilon_grid")) widths = to_double_list("epsilon_grid", kv.at("epsilon_grid"));

  MonotoneFunctional phi;
  int j_size = 0;
  double interval_center = get_double(kv, "interval_center", 0.5);
  RunOutcome outcome;

  if (functional == "mean") {
    j_size = get_int(kv, "j_size", 2);
    if (j_size < 1) throw std::invalid_argument("config: j_size must be >= 1");
    phi = [](std::span<const double> q) {
      double s = 0.0;
      for (double v : q) s += v;
      return s / static_cast<double>(q.size());
    };
  } else if (functional == "eigenvalue") {
    const int d = get_int(kv, "d", 1);
    const int radius = get_int(kv, "l", 1);
    CenterPair center = center_from_kv(kv, "center", d);
    if (center.first.empty()) {
      center.first.assign(static_cast<std::size_t>(d), 0);
      center.second.assign(static_cast<std::size_t>(d), 0);
    }
    const TwoParticleCube cube{center.first, center.second, radius};
    const InteractionSpec interaction = interaction_from_kv(kv);
    const int k = get_int(kv, "eigenvalue_index", 0);
    phi = eigenvalue_functional(cube, interaction, k);
    j_size = static_cast<int>(shadow(cube).size());
    interval_center = get_double(kv, "interval_center", 0.0);
    outcome.echo["d"] = std::to_string(d);
    outcome.echo["l"] = std::to_string(radius);
    outcome.echo["center"] = center_echo(center);
    outcome.echo["interaction_strength"] = fmt_g17(interaction.strength);
    outcome.echo["interaction_range"] = std::to_string(interaction.range);
    outcome.echo["eigenvalue_index"] = std::to_string(k);
  } else {
    throw std::invalid_argument("config: functional must be 'mean' or 'eigenvalue'");
  }

  std::vector<ConcentrationEstimate> estimates;
  bool pass = true;
  for (double width : widths) {
    const StollmannResult r = stollmann_empirical(phi, j_size, interval_center - width / 2.0,
                                                  width, samples, seed, threads);
    estimates.push_back(r.estimate);
    pass = pass && r.pass;
  }

  outcome.echo["functional"] = functional;
  if (functional == "mean") outcome.echo["j_size"] = std::to_string(j_size);
  outcome.echo["interval_center"] = fmt_g17(interval_center);
  outcome.echo["epsilon_grid"] = join_doubles(widths);
  outcome.echo["samples"] = std::to_string(samples);
  outcome.echo["seed"] = std::to_string(seed);
  outcome.echo["threads"] = std::to_string(threads);
  outcome.csv = concentration_csv(estimates);
  outcome.pass = pass;

  json j;
  j["artifact"] = "qpwegner";
  j["version"] = kVersion;
  j["subcommand"] = "stollmann";
  j["pass"] = pass;
  j["pass_criterion"] = "ci_low <= |J| * s(width) for every interval width";
  j["params"] = params_json(outcome.echo);
  j["j_size"] = j_size;
  j["estimates"] = estimates_json(estimates);
  outcome.summary = j;
  return outcome;
}

const std::set<std::string> kDmCheckKeys = {"d",       "l",        "center",  "interaction_strength",
                                            "interaction_range", "samples", "t_values", "seed",
                                            "threads"};

RunOutcome run_dm_check(const Kv& kv) {
  require_known_keys(kv, kDmCheckKeys, "dm-check");
  const int d = get_int(kv, "d", 1);
  const int radius = get_int(kv, "l", 1);
  const std::int64_t samples = get_i64(kv, "samples", 100);
  const std::uint64_t seed = get_u64(kv, "seed", 12345);
  std::vector<double> t_values = {0.1, 1.0, 3.7};
  if (kv.count("t_values")) t_values = to_double_list("t_values", kv.at("t_values"));
  for (double t : t_values)
    if (!(t > 0.0)) throw std::invalid_argument("config: t_values must be positive");
  CenterPair center = center_from_kv(kv, "center", d);
  if (center.first.empty()) {
    center.first.assign(static_cast<std::size_t>(d), 0);
    center.second.assign(static_cast<std::size_t>(d), 0);
  }
  const TwoParticleCube cube{center.first, center.second, radius};
  const InteractionSpec interaction = interaction_from_kv(kv);
  const int j_size = static_cast<int>(shadow(cube).size());
  const auto dim = cube.dimension();

  double min_monotone = std::numeric_limits<double>::infinity();
  double min_diagonal = std::numeric_limits<double>::infinity();
  double max_shift_deviation = 0.0;
  std::string csv = "index,t,eigenvalue_index,monotone_margin,diagonal_margin\n";
  for (std::int64_t i = 0; i < samples; ++i) {
    SplitStream stream(derive_key(seed, {0x646d63u, static_cast<std::uint64_t>(i)}));
    ParameterVector q, r;
    q.values.resize(static_cast<std::size_t>(j_size));
    r.values.resize(static_cast<std::size_t>(j_size));
    for (double& v : q.values) v = stream.next_unit();
    for (double& v : r.values) v = stream.next_unit();
    const double t = t_values[static_cast<std::size_t>(i) % t_values.size()];
    const int k = static_cast<int>(i % dim);
    const MonotoneFunctional phi = eigenvalue_functional(cube, interaction, k);
    const DmCheckResult check = check_dm(phi, q, r, t);
    min_monotone = std::min(min_monotone, check.monotone_margin);
    min_diagonal = std::min(min_diagonal, check.diagonal_margin);
    // the assembled family shifts by exactly 2t along the diagonal
    max_shift_deviation =
        std::max(max_shift_deviation, std::abs(check.diagonal_margin - t));
    csv += std::to_string(i) + ',' + fmt_g12(t) + ',' + std::to_string(k) + ',' +
           fmt_g12(check.monotone_margin) + ',' + fmt_g12(check.diagonal_margin) + '\n';
  }

  RunOutcome outcome;
  outcome.csv = csv;
  outcome.pass = min_monotone >= -1e-12 && min_diagonal >= -1e-12;
  outcome.echo["d"] = std::to_string(d);
  outcome.echo["l"] = std::to_string(radius);
  outcome.echo["center"] = center_echo(center);
  outcome.echo["interaction_strength"] = fmt_g17(interaction.strength);
  outcome.echo["interaction_range"] = std::to_string(interaction.range);
  outcome.echo["samples"] = std::to_string(samples);
  outcome.echo["t_values"] = join_doubles(t_values);
  outcome.echo["seed"] = std::to_string(seed);

  json j;
  j["artifact"] = "qpwegner";
  j["version"] = kVersion;
  j["subcommand"] = "dm-check";
  j["pass"] = outcome.pass;
  j["pass_criterion"] = "DM margins >= -1e-12 over all sampled (q, r, t)";
  j["params"] = params_json(outcome.echo);
  j["j_size"] = j_size;
  j["min_monotone_margin"] = min_monotone;
  j["min_diagonal_margin"] = min_diagonal;
  j["max_diagonal_shift_deviation_from_2t"] = max_shift_deviation;
  outcome.summary = j;
  return outcome;
}

const std::set<std::string> kIdsKeys = {"d",      "nu",        "alpha",   "l",
                                        "kappa",  "m_exponent", "c_upper", "c_lower", "sign",
                                        "truncation_levels", "theta_seed", "omega_samples",
                                        "seed",   "threads",   "e_min",   "e_max", "e_points"};

RunOutcome run_ids(const Kv& kv, bool verify_eigen) {
  require_known_keys(kv, kIdsKeys, "ids");
  const int d = get_int(kv, "d", 1);
  const int nu = get_int(kv, "nu", 1);
  const int radius = get_int(kv, "l", 16);
  if (radius < 0) throw std::invalid_argument("config: l must be >= 0");
  const ShiftAction action = action_from_kv(kv, d, nu);
  const CoefficientSchedule schedule = schedule_from_kv(kv);
  int truncation = get_int(kv, "truncation_levels", 0);
  if (truncation == 0) truncation = default_truncation_levels(schedule, nu, 1);
  const std::uint64_t seed = get_u64(kv, "seed", 12345);
  const std::uint64_t theta_seed = get_u64(kv, "theta_seed", seed);
  const std::int64_t samples = get_i64(kv, "omega_samples", 100);
  if (samples < 1) throw std::invalid_argument("config: omega_samples must be >= 1");
  const int threads = get_int(kv, "threads", 1);
  const RandeletteField field =
      RandeletteField::make(schedule, ThetaSample::keyed(theta_seed), nu, truncation);

  // the potential occupies [0, bound] for the positive sign, [-bound, 0]
  // for the negative one
  const double lo_pad = schedule.sign < 0 ? field.max_value_bound() : 0.0;
  const double hi_pad = schedule.sign < 0 ? 0.0 : field.max_value_bound();
  const double e_min = get_double(kv, "e_min", -2.0 * d - lo_pad - 0.25);
  const double e_max = get_double(kv, "e_max", 2.0 * d + hi_pad + 0.25);
  const int e_points = get_int(kv, "e_points", 101);
  if (e_points < 2) throw std::invalid_argument("config: e_points must be >= 2");
  if (!(e_max > e_min)) throw std::invalid_argument("config: e_max must exceed e_min");

  const LatticeCube cube{LatticeVector(static_cast<std::size_t>(d), 0), radius};
  const auto sites = cube.sites();
  std::vector<Spectrum> spectra(static_cast<std::size_t>(samples));
  parallel_for(samples, threads, [&](std::int64_t i) {
    std::vector<double> coords(static_cast<std::size_t>(nu));
    for (int cidx = 0; cidx < nu; ++cidx)
      coords[static_cast<std::size_t>(cidx)] = keyed_unit(
          seed, {0x696473u, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(cidx)});
    const TorusPoint omega{std::move(coords)};
    std::map<LatticeVector, double> values;
    for (const auto& x : sites) values[x] = potential(field, action, omega, x);
    const HamiltonianMatrix h = assemble_one_particle(cube, values);
    spectra[static_cast<std::size_t>(i)] =
        verify_eigen ? eigenvalues_symmetric_checked(h) : eigenvalues_symmetric(h);
  });

  std::string csv = "energy,mean_count,mean_ids\n";
  double first_ids = 0.0, last_ids = 0.0;
  for (int p = 0; p < e_points; ++p) {
    const double energy = e_min + (e_max - e_min) * p / (e_points - 1);
    double count_sum = 0.0;
    for (const auto& s : spectra) count_sum += count_below(s, energy);
    const double mean_count = count_sum / static_cast<double>(samples);
    const double mean_ids = mean_count / static_cast<double>(cube.site_count());
    if (p == 0) first_ids = mean_ids;
    if (p == e_points - 1) last_ids = mean_ids;
    csv += fmt_g12(energy) + ',' + fmt_g12(mean_count) + ',' + fmt_g12(mean_ids) + '\n';
  }

  RunOutcome outcome;
  outcome.csv = csv;
  outcome.pass = true;
  outcome.echo["d"] = std::to_string(d);
  outcome.echo["nu"] = std::to_string(nu);
  outcome.echo["alpha"] = join_doubles(action.frequency);
  outcome.echo["l"] = std::to_string(radius);
  outcome.echo["kappa"] = fmt_g17(schedule.kappa);
  outcome.echo["m_exponent"] = fmt_g17(schedule.m_exponent);
  outcome.echo["c_upper"] = fmt_g17(schedule.c_upper);
  outcome.echo["c_lower"] = fmt_g17(schedule.c_lower);
  outcome.echo["sign"] = std::to_string(schedule.sign);
  outcome.echo["truncation_levels"] = std::to_string(truncation);
  outcome.echo["theta_seed"] = std::to_string(theta_seed);
  outcome.echo["omega_samples"] = std::to_string(samples);
  outcome.echo["seed"] = std::to_string(seed);
  outcome.echo["threads"] = std::to_string(threads);
  outcome.echo["e_min"] = fmt_g17(e_min);
  outcome.echo["e_max"] = fmt_g17(e_max);
  outcome.echo["e_points"] = std::to_string(e_points);

  json j;
  j["artifact"] = "qpwegner";
  j["version"] = kVersion;
  j["subcommand"] = "ids";
  j["pass"] = true;
  j["params"] = params_json(outcome.echo);
  j["volume"] = cube.site_count();
  j["ids_at_e_min"] = first_ids;
  j["ids_at_e_max"] = last_ids;
  outcome.summary = j;
  return outcome;
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names = {
      "spacing",    "wegner-classical", "wegner-iid2p", "wegner-qp1",
      "wegner-qp2", "stollmann",        "dm-check",     "ids"};
  return names;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                  " is not of the form key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " has an empty key");
    if (kv.count(key))
      throw std::invalid_argument("config: duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

WegnerExperimentConfig wegner_config_from_kv(const std::string& subcommand, const Kv& kv) {
  WegnerExperimentConfig c;
  c.d = get_int(kv, "d", 1);
  c.radius = get_int(kv, "l", 2);
  c.energy = get_double(kv, "energy", 0.0);
  if (kv.count("epsilon_grid")) c.epsilon_grid = to_double_list("epsilon_grid", kv.at("epsilon_grid"));
  c.omega_samples = get_i64(kv, "omega_samples", 10000);
  c.seed = get_u64(kv, "seed", 12345);
  c.theta_seed = get_u64(kv, "theta_seed", c.seed);
  c.threads = get_int(kv, "threads", 1);

  if (subcommand == "wegner-classical") {
    require_known_keys(kv, kClassicalKeys, subcommand);
    c.mode = ExperimentMode::classical_1p;
    c.action = trivial_action(c.d);
  } else if (subcommand == "wegner-iid2p") {
    require_known_keys(kv, kIid2pKeys, subcommand);
    const std::string volumes = get_string(kv, "volumes", "one");
    if (volumes == "one")
      c.mode = ExperimentMode::iid_2p_one_volume;
    else if (volumes == "two")
      c.mode = ExperimentMode::iid_2p_two_volume;
    else
      throw std::invalid_argument("config: volumes must be 'one' or 'two'");
    c.action = trivial_action(c.d);
    c.interaction = interaction_from_kv(kv);
    c.center = center_from_kv(kv, "center", c.d);
    c.center_prime = center_from_kv(kv, "center_prime", c.d);
    c.center_second = center_from_kv(kv, "center_second", c.d);
    if (c.mode == ExperimentMode::iid_2p_two_volume && !kv.count("center_second"))
      throw std::invalid_argument("config: two-volume mode requires center_second");
  } else if (subcommand == "wegner-qp1" || subcommand == "wegner-qp2") {
    require_known_keys(kv, subcommand == "wegner-qp1" ? kQp1Keys : kQp2Keys, subcommand);
    c.mode = subcommand == "wegner-qp1" ? ExperimentMode::qp_one_volume
                                        : ExperimentMode::qp_two_volume;
    c.nu = get_int(kv, "nu", 1);
    c.action = action_from_kv(kv, c.d, c.nu);
    c.schedule = schedule_from_kv(kv);
    c.interaction = interaction_from_kv(kv);
    c.enclosing_exponent = get_double(kv, "r", 2.0);
    c.theta_budget_exponent = get_double(kv, "b", 1.0);
    c.truncation_levels = get_int(kv, "truncation_levels", 0);
    c.center = center_from_kv(kv, "center", c.d);
    c.center_prime = center_from_kv(kv, "center_prime", c.d);
    c.center_second = center_from_kv(kv, "center_second", c.d);
    if (c.mode == ExperimentMode::qp_two_volume && !kv.count("center_second"))
      throw std::invalid_argument("config: two-volume mode requires center_second");
  } else {
    throw std::invalid_argument("unknown wegner subcommand '" + subcommand + "'");
  }
  return finalize_config(c);
}

int run_subcommand(const std::string& subcommand, const HarnessOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  try {
    const auto& names = subcommand_names();
    if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
      std::cerr << "error: unknown subcommand '" << subcommand << "'\n";
      return kExitConfigError;
    }

    Kv kv;
    if (!options.config_path.empty()) kv = parse_config_file(options.config_path);
    if (options.seed && subcommand != "spacing") kv["seed"] = std::to_string(*options.seed);
    if (options.threads && subcommand != "spacing")
      kv["threads"] = std::to_string(*options.threads);
    if (options.omega_samples) {
      if (subcommand == "stollmann" || subcommand == "dm-check")
        kv["samples"] = std::to_string(*options.omega_samples);
      else if (subcommand != "spacing")
        kv["omega_samples"] = std::to_string(*options.omega_samples);
    }

    RunOutcome outcome;
    if (subcommand == "spacing") {
      outcome = run_spacing(kv);
    } else if (subcommand == "stollmann") {
      outcome = run_stollmann(kv);
    } else if (subcommand == "dm-check") {
      outcome = run_dm_check(kv);
    } else if (subcommand == "ids") {
      outcome = run_ids(kv, options.verify_eigen);
    } else {
      WegnerExperimentConfig config = wegner_config_from_kv(subcommand, kv);
      config.verify_eigen = options.verify_eigen;
      const bool dump_matrix = get_int(kv, "dump_matrix", 0) != 0;
      outcome = run_wegner(subcommand, config, dump_matrix);
    }

    fs::create_directories(options.out_dir);
    const fs::path csv_path = fs::path(options.out_dir) / (subcommand + ".csv");
    const fs::path json_path = fs::path(options.out_dir) / (subcommand + ".json");
    const fs::path manifest_path = fs::path(options.out_dir) / (subcommand + ".manifest.txt");
    write_file_atomic(csv_path, outcome.csv);
    write_file_atomic(json_path, outcome.summary.dump(2) + "\n");
    if (!outcome.matrix.empty())
      write_file_atomic(fs::path(options.out_dir) / (subcommand + ".matrix.txt"),
                        outcome.matrix);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_file_atomic(manifest_path,
                      manifest_text(subcommand, outcome, options, wall, csv_path, json_path));

    std::cerr << subcommand << ": " << (outcome.pass ? "PASS" : "FAIL") << " (csv: "
              << csv_path.string() << ")\n";
    return outcome.pass ? kExitPass : kExitStatFail;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace qpwegner::harness
