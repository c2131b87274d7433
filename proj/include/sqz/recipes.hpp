#pragma once

#include "sqz/config.hpp"
#include "sqz/geometry.hpp"
#include "sqz/sequences.hpp"
#include "sqz/types.hpp"

#include <cstdint>
#include <optional>
#include <string>

// Library implementations of the CLI subcommands; each consumes a parsed
// config and returns the full CSV text. Deterministic: (config, seed) fixes
// every byte of the output for any thread count.

namespace sqz {

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> geometry_file;
};

// [geometry] section -> ensemble (seed override applies to random kinds)
SpinEnsemble ensemble_from_config(const Config& cfg, const RunOverrides& ov);

// [sequence] section -> template + variant; epsilon target mapped onto the
// tau_plus/tau_minus delay split of the 34-pulse echo template
struct SequenceSpec {
  PulseSequence seq;
  SequenceVariant variant;
  double tau = 0.0;
  double tau_plus = 0.0;
  double tau_minus = 0.0;
  double epsilon_target = 0.0;
};
SequenceSpec sequence_from_config(const Config& cfg, const std::string& variant_key,
                                  double epsilon);

std::string run_simulate(const Config& cfg, const RunOverrides& ov);
std::string run_verify_sequence(const Config& cfg, const RunOverrides& ov);
std::string run_gap(const Config& cfg, const RunOverrides& ov);
std::string run_squeeze(const Config& cfg, const RunOverrides& ov);
std::string run_sensitivity(const Config& cfg, const RunOverrides& ov);
std::string run_sweep(const Config& cfg, const RunOverrides& ov);
std::string run_project_check(const Config& cfg, const RunOverrides& ov);

// dispatch by subcommand name (simulate | verify-sequence | gap | squeeze |
// sensitivity | sweep | project-check)
std::string run_recipe(const std::string& command, const Config& cfg, const RunOverrides& ov);

} // namespace sqz
