#ifndef EITLOG_RUNNER_HPP
#define EITLOG_RUNNER_HPP

#include "eitlog/conductivity.hpp"
#include "eitlog/experiments.hpp"
#include "eitlog/mesh.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace eitlog {

/// Flat key-value experiment configuration. Unknown keys are rejected.
struct RunConfig {
    std::string experiment;
    int mesh_level = 2;
    int basis_order = 8;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::string conductivity = "constant 1.0";
    std::vector<double> tau_grid;             // empty: automatic window
    std::vector<double> epsilons = {0.25};
    std::vector<double> r_grid = {0.25};
    std::vector<double> steps;                // empty: fd defaults
    std::vector<int> n_grid;                  // empty: {N, 2N, 4N} as admissible
    int count = 20;
    double contrast = 2.0;
    double bound_lo = 0.5;
    double bound_hi = 2.0;
};

/// Exit codes of run_config / the command-line driver.
inline constexpr int kExitPass = 0;
inline constexpr int kExitGatesFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

const std::vector<std::string>& experiment_names();

/// Parses `key = value` lines ('#' comments). Throws ConfigError on
/// unknown keys, malformed values, empty grids, or an aliasing violation.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::filesystem::path& path);

/// Builds the field described by `spec`: "constant <v>", "smooth"
/// (seeded), "inclusions" (seeded), or "inclusions cx cy r v [...]".
ConductivityField parse_conductivity(const DiskMesh& mesh,
                                     const std::string& spec,
                                     std::uint64_t seed, double lo, double hi);

struct RunOutcome {
    int exit_code = kExitPass;
    std::vector<std::pair<std::string, ExperimentReport>> reports;
    std::vector<std::filesystem::path> artifacts;
    std::filesystem::path manifest;
};

/// Executes the configured experiment(s), writes JSON reports, CSV tables
/// and the checksum manifest, and returns the outcome. `echo` receives
/// console summaries (may be null).
RunOutcome run_config(const RunConfig& config,
                      const std::optional<std::string>& out_override,
                      const std::optional<std::uint64_t>& seed_override,
                      std::ostream* echo);

} // namespace eitlog

#endif
