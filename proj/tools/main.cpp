// Command-line front end: one subcommand per experiment, a flat key=value
// config file, and a handful of override flags. Exit codes: 0 the
// subcommand's acceptance predicate holds, 1 configuration error, 2
// statistical failure.
#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "qpwegner/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Eigenvalue-concentration experiments for lattice Hamiltonians with "
               "quasi-periodic hierarchical potentials"};
  app.require_subcommand(1);

  struct Flags {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::int64_t samples = 0;
    bool samples_set = false;
    int threads = 0;
    bool threads_set = false;
    bool verify_eigen = false;
  };

  static const struct {
    const char* name;
    const char* help;
  } kSubcommands[] = {
      {"spacing", "Trajectory spacing table delta_L and Diophantine exponent fit"},
      {"wegner-classical", "One-particle concentration bound with an IID potential"},
      {"wegner-iid2p", "Two-particle one-/two-volume bounds with an IID potential"},
      {"wegner-qp1", "Quasi-periodic two-particle one-volume concentration experiment"},
      {"wegner-qp2", "Quasi-periodic two-particle two-volume concentration experiment"},
      {"stollmann", "Empirical concentration bound for diagonally monotone functionals"},
      {"dm-check", "Diagonal-monotonicity margins of eigenvalue functionals"},
      {"ids", "Finite-volume integrated density of states curve"},
  };

  std::vector<std::pair<CLI::App*, std::shared_ptr<Flags>>> subs;
  for (const auto& sc : kSubcommands) {
    auto* sub = app.add_subcommand(sc.name, sc.help);
    auto flags = std::make_shared<Flags>();
    sub->add_option("--config", flags->config, "Path to a key = value config file")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", flags->out, "Output directory (default: out)");
    sub->add_option("--seed", flags->seed, "Override the sampling seed")
        ->each([flags](const std::string&) { flags->seed_set = true; });
    sub->add_option("--omega-samples", flags->samples, "Override the sample count")
        ->each([flags](const std::string&) { flags->samples_set = true; });
    sub->add_option("--threads", flags->threads, "Worker threads (output is thread-count independent)")
        ->each([flags](const std::string&) { flags->threads_set = true; });
    sub->add_flag("--verify-eigen", flags->verify_eigen,
                  "Residual and trace checks on every eigensolve");
    subs.emplace_back(sub, flags);
  }

  CLI11_PARSE(app, argc, argv);

  for (const auto& [sub, flags] : subs) {
    if (!sub->parsed()) continue;
    qpwegner::harness::HarnessOptions options;
    options.config_path = flags->config;
    options.out_dir = flags->out;
    options.verify_eigen = flags->verify_eigen;
    if (flags->seed_set) options.seed = flags->seed;
    if (flags->samples_set) options.omega_samples = flags->samples;
    if (flags->threads_set) options.threads = flags->threads;
    return qpwegner::harness::run_subcommand(sub->get_name(), options);
  }
  return qpwegner::harness::kExitConfigError;
}
