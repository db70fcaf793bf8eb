// Experiment orchestration: flat key=value configs with strict unknown-key
// rejection, flag overrides, and machine-readable artifacts (CSV table,
// JSON summary, plain-text run manifest). Reruns of the same manifest
// produce byte-identical CSV/JSON at any thread count.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qpwegner/wegner_mc.hpp"

namespace qpwegner::harness {

struct HarnessOptions {
  std::string config_path;  // empty: defaults only
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> omega_samples;
  std::optional<int> threads;
  std::string out_dir = "out";
  bool verify_eigen = false;
};

// Exit-code contract: 0 the subcommand's acceptance predicate holds,
// 1 configuration error, 2 statistical failure.
inline constexpr int kExitPass = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitStatFail = 2;

const std::vector<std::string>& subcommand_names();

// Runs one subcommand end to end, writing <out>/<name>.csv, .json and
// .manifest.txt. Diagnostics go to stderr. Never throws.
int run_subcommand(const std::string& subcommand, const HarnessOptions& options);

// key = value lines, '#' comments; throws on malformed lines.
std::map<std::string, std::string> parse_config_file(const std::string& path);

// Builds a validated experiment config for one of the wegner subcommands
// from raw key/value pairs (defaults filled, strict key checking).
WegnerExperimentConfig wegner_config_from_kv(const std::string& subcommand,
                                             const std::map<std::string, std::string>& kv);

}  // namespace qpwegner::harness
