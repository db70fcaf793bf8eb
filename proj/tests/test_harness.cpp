#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qpwegner/harness.hpp"

using namespace qpwegner;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("qpwegner_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& name, const std::string& body) {
  const fs::path path = dir / name;
  std::ofstream out(path);
  out << body;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config files parse key = value lines with comments") {
  const fs::path dir = fresh_dir("parse");
  const fs::path path = write_config(dir, "a.conf",
                                     "# comment\n"
                                     "d = 1\n"
                                     "  l=2  \n"
                                     "\n"
                                     "epsilon_grid = 0.01, 0.02\n");
  const auto kv = harness::parse_config_file(path.string());
  CHECK(kv.at("d") == "1");
  CHECK(kv.at("l") == "2");
  CHECK(kv.at("epsilon_grid") == "0.01, 0.02");

  const fs::path bad = write_config(dir, "bad.conf", "no equals sign here\n");
  CHECK_THROWS_AS(harness::parse_config_file(bad.string()), std::invalid_argument);
  const fs::path dup = write_config(dir, "dup.conf", "d = 1\nd = 2\n");
  CHECK_THROWS_AS(harness::parse_config_file(dup.string()), std::invalid_argument);
  CHECK_THROWS_AS(harness::parse_config_file((dir / "missing.conf").string()),
                  std::invalid_argument);
}

TEST_CASE("unknown keys are rejected by name") {
  CHECK_THROWS_WITH_AS(harness::wegner_config_from_kv("wegner-classical", {{"bogus", "1"}}),
                       doctest::Contains("bogus"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(harness::wegner_config_from_kv("wegner-qp1", {{"volumes", "one"}}),
                       doctest::Contains("volumes"), std::invalid_argument);
}

TEST_CASE("defaults are filled and validated") {
  const WegnerExperimentConfig c = harness::wegner_config_from_kv("wegner-qp1", {});
  CHECK(c.mode == ExperimentMode::qp_one_volume);
  CHECK(c.d == 1);
  CHECK(c.radius == 2);
  CHECK(c.epsilon_grid.size() == 9);
  CHECK(c.epsilon_grid.front() == 1e-3);
  CHECK(c.epsilon_grid.back() == 1e-1);
  CHECK(c.theta_seed == c.seed);
  CHECK(c.action.frequency.size() == 1);
}

TEST_CASE("two-volume modes demand an explicit second center") {
  CHECK_THROWS_WITH_AS(harness::wegner_config_from_kv("wegner-iid2p", {{"volumes", "two"}}),
                       doctest::Contains("center_second"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(harness::wegner_config_from_kv("wegner-qp2", {{"r", "5"}}),
                       doctest::Contains("center_second"), std::invalid_argument);
}

TEST_CASE("mode-specific violations carry the condition in the message") {
  CHECK_THROWS_WITH_AS(
      harness::wegner_config_from_kv(
          "wegner-qp2", {{"center_prime", "0,5"}, {"center_second", "5,0"}, {"r", "5"}}),
      doctest::Contains("separation requirement"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(harness::wegner_config_from_kv("wegner-qp1", {{"kappa", "0.9"}}),
                       doctest::Contains("kappa"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      harness::wegner_config_from_kv("wegner-qp2", {{"center_second", "40,40"}, {"r", "2"}}),
      doctest::Contains("L^r"), std::invalid_argument);
}

TEST_CASE("spacing subcommand writes csv, json, and a reusable manifest") {
  const fs::path dir = fresh_dir("spacing");
  const fs::path conf = write_config(dir, "spacing.conf", "l_values = 2,4,8,16\n");
  harness::HarnessOptions options;
  options.config_path = conf.string();
  options.out_dir = (dir / "out").string();
  CHECK(harness::run_subcommand("spacing", options) == harness::kExitPass);

  const fs::path csv = dir / "out" / "spacing.csv";
  const fs::path json = dir / "out" / "spacing.json";
  const fs::path manifest = dir / "out" / "spacing.manifest.txt";
  REQUIRE(fs::exists(csv));
  REQUIRE(fs::exists(json));
  REQUIRE(fs::exists(manifest));
  CHECK(slurp(csv).rfind("L,delta,delta_times_L\n", 0) == 0);

  // the manifest doubles as a config reproducing the run byte for byte
  harness::HarnessOptions rerun;
  rerun.config_path = manifest.string();
  rerun.out_dir = (dir / "out2").string();
  CHECK(harness::run_subcommand("spacing", rerun) == harness::kExitPass);
  CHECK(slurp(dir / "out2" / "spacing.csv") == slurp(csv));
  CHECK(slurp(dir / "out2" / "spacing.json") == slurp(json));
}

TEST_CASE("classical subcommand honors flag overrides and is thread independent") {
  const fs::path dir = fresh_dir("classical");
  harness::HarnessOptions options;
  options.out_dir = (dir / "a").string();
  options.omega_samples = 3000;
  options.seed = 4242;
  options.threads = 1;
  CHECK(harness::run_subcommand("wegner-classical", options) == harness::kExitPass);
  harness::HarnessOptions threaded = options;
  threaded.out_dir = (dir / "b").string();
  threaded.threads = 4;
  CHECK(harness::run_subcommand("wegner-classical", threaded) == harness::kExitPass);
  CHECK(slurp(dir / "a" / "wegner-classical.csv") == slurp(dir / "b" / "wegner-classical.csv"));
  CHECK(slurp(dir / "a" / "wegner-classical.json") == slurp(dir / "b" / "wegner-classical.json"));
  const std::string csv = slurp(dir / "a" / "wegner-classical.csv");
  CHECK(csv.rfind("epsilon,p_hat,ci_low,ci_high,n_samples,bound_diagnostic\n", 0) == 0);
}

TEST_CASE("config errors exit with code 1 and bad subcommands are rejected") {
  const fs::path dir = fresh_dir("errors");
  harness::HarnessOptions options;
  options.out_dir = (dir / "out").string();
  const fs::path bad = write_config(dir, "bad.conf", "kappa = 0.5\n");
  options.config_path = bad.string();
  CHECK(harness::run_subcommand("wegner-qp1", options) == harness::kExitConfigError);
  options.config_path.clear();
  CHECK(harness::run_subcommand("nonsense", options) == harness::kExitConfigError);
  const fs::path sym = write_config(dir, "sym.conf",
                                    "center_prime = 0,5\ncenter_second = 5,0\nr = 5\n");
  options.config_path = sym.string();
  CHECK(harness::run_subcommand("wegner-qp2", options) == harness::kExitConfigError);
}

TEST_CASE("stollmann and dm-check subcommands run quickly and pass") {
  const fs::path dir = fresh_dir("stoll");
  harness::HarnessOptions options;
  options.out_dir = (dir / "out").string();
  options.omega_samples = 5000;  // maps to the sample count for these modes
  CHECK(harness::run_subcommand("stollmann", options) == harness::kExitPass);
  options.omega_samples = 30;
  CHECK(harness::run_subcommand("dm-check", options) == harness::kExitPass);
  CHECK(fs::exists(dir / "out" / "stollmann.csv"));
  CHECK(fs::exists(dir / "out" / "dm-check.json"));
}

TEST_CASE("JSON summaries follow the frozen field schema") {
  const fs::path dir = fresh_dir("schema");
  harness::HarnessOptions options;
  options.out_dir = (dir / "out").string();
  options.omega_samples = 500;
  CHECK(harness::run_subcommand("wegner-qp1", options) != harness::kExitConfigError);
  CHECK(harness::run_subcommand("spacing", options) == harness::kExitPass);

  const auto qp1 = nlohmann::json::parse(slurp(dir / "out" / "wegner-qp1.json"));
  for (const char* key : {"artifact", "version", "subcommand", "mode", "pass_criterion"})
    CHECK(qp1.at(key).is_string());
  CHECK(qp1.at("pass").is_boolean());
  CHECK(qp1.at("params").is_object());
  REQUIRE(qp1.at("estimates").is_array());
  for (const auto& row : qp1.at("estimates")) {
    for (const char* key : {"epsilon", "p_hat", "ci_low", "ci_high", "bound_diagnostic"})
      CHECK(row.at(key).is_number());
    CHECK(row.at("n_samples").is_number_integer());
  }
  const auto& diag = qp1.at("diagnostics");
  for (const char* key :
       {"trajectory_spacing", "coefficient_at_split", "conditional_density_bound",
        "truncation_tail", "fitted_log_constant", "fitted_power_constant"})
    CHECK(diag.at(key).is_number());
  for (const char* key : {"enclosing_radius", "separation_depth", "truncation_levels"})
    CHECK(diag.at(key).is_number_integer());

  const auto spacing = nlohmann::json::parse(slurp(dir / "out" / "spacing.json"));
  for (const char* key : {"fitted_b", "fitted_c", "min_delta_times_l"})
    CHECK(spacing.at(key).is_number());
  CHECK(spacing.at("pass").is_boolean());
}

TEST_CASE("dump_matrix writes the first-sample Hamiltonian as dense text") {
  const fs::path dir = fresh_dir("dump");
  const fs::path conf = write_config(dir, "dump.conf",
                                     "l = 1\ndump_matrix = 1\nomega_samples = 50\n");
  harness::HarnessOptions options;
  options.config_path = conf.string();
  options.out_dir = (dir / "out").string();
  CHECK(harness::run_subcommand("wegner-qp1", options) != harness::kExitConfigError);
  const fs::path dump = dir / "out" / "wegner-qp1.matrix.txt";
  REQUIRE(fs::exists(dump));
  std::ifstream in(dump);
  std::string word;
  int dim = 0;
  in >> word >> dim;
  CHECK(word == "dim");
  CHECK(dim == 9);
  // symmetric, with unit hopping on the first off-diagonal block
  std::vector<std::vector<double>> m(9, std::vector<double>(9));
  for (auto& row : m)
    for (double& v : row) in >> v;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) CHECK(m[i][j] == m[j][i]);
  CHECK(m[0][1] == 1.0);
  CHECK(m[0][3] == 1.0);
}

TEST_CASE("ids subcommand emits a monotone curve") {
  const fs::path dir = fresh_dir("ids");
  const fs::path conf = write_config(dir, "ids.conf",
                                     "l = 8\nomega_samples = 20\ne_points = 41\n");
  harness::HarnessOptions options;
  options.config_path = conf.string();
  options.out_dir = (dir / "out").string();
  CHECK(harness::run_subcommand("ids", options) == harness::kExitPass);
  std::ifstream in(dir / "out" / "ids.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "energy,mean_count,mean_ids");
  double last = -1.0;
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto second_comma = line.find(',', line.find(',') + 1);
    const double ids = std::stod(line.substr(second_comma + 1));
    CHECK(ids >= last);
    last = ids;
    ++rows;
  }
  CHECK(rows == 41);
  CHECK(last == 1.0);  // the default grid reaches past the spectrum
}
