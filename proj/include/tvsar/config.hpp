#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tvsar/samplers.hpp"

namespace tvsar {

// Flat run configuration shared by all subcommands; populated from a
// `section.key = value` file and then overridden by command-line flags.
struct RunConfig {
  std::vector<int> seasons{1};
  std::vector<int> orders{1};
  GibbsConfig gibbs;
  int detrend_window = 0;  // 0 = off
  std::string experiment;  // simulate: builtin design id
  int sim_T = 1000;
  double sim_sigma = 1.0;
  int replicates = 1;
  int lps_split = 0;
  int lps_refit_every = 12;
  int grid_frequencies = 314;
};

// Applies one key/value pair; throws std::invalid_argument on unknown
// keys or unparseable values.
void apply_config_key(RunConfig& cfg, const std::string& key,
                      const std::string& value);

// Parses a flat key-value file (`section.key = value`, '#' comments).
RunConfig load_config_file(const std::string& path);

// Canonical serialization of everything that affects sampling; hashed
// into archive manifests so stale archives are detected.
std::string canonical_config(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace tvsar
