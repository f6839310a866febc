#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinv/boundary.hpp"
#include "pinv/error.hpp"
#include "pinv/grid.hpp"
#include "pinv/nonlinearity.hpp"
#include "pinv/solver.hpp"

namespace pinv {

class ConfigError : public Error {
public:
    using Error::Error;
};

enum class Experiment { forward, linearize, constants, reconstruct, uniqueness, stability };
Experiment parse_experiment(const std::string& name);
const char* to_string(Experiment e);

struct TermSpec {
    std::string name;
    FamilyParams params;
};

struct ScenarioConfig {
    std::string name;
    std::string description;
    Experiment experiment = Experiment::forward;
    GridConfig grid;
    TermSpec nonlinearity;
    double delta1 = 0.2;
    double delta2 = 0.1;
    double epsilon = 0.05;
    double r = 1.0;
    int n_lambda = 41;
    Scheme scheme = Scheme::implicit_euler;
    SolverOptions solver;
    double margin = 0.05;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::string output;
    double alpha = 0.5;  // recorded only
    int threads = 1;
    nlohmann::json section;  // experiment-specific block (validated by the experiment)
    nlohmann::json effective;  // normalized config used for hashing
};

/// Parses and validates a scenario tree; throws ConfigError with the offending key.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);

/// SHA-256 of the normalized config (output directory and thread count excluded).
std::string config_hash(const ScenarioConfig& c);

struct RunOverrides {
    std::optional<std::filesystem::path> output;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

/// Output directory: override, else the config's output resolved against
/// $PINV_OUTPUT_ROOT (default "runs"), else <root>/<name>.
std::filesystem::path resolve_output(const ScenarioConfig& c, const RunOverrides& o);

/// Runs one scenario and writes its outputs plus manifest.json. Returns the
/// process exit status: 0 ok, 2 config error, 3 solver failure / blow-up,
/// 4 invariant violation, 1 anything else. Errors are also printed to `err`
/// as one JSON object.
int run_scenario(const std::filesystem::path& config_path, const RunOverrides& overrides, std::ostream& log,
                 std::ostream& err);

struct VerifyEntry {
    std::string file;
    std::string status;  // pass | fail | missing | extra
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyEntry> entries;
    bool passed() const;
};

/// Compares numeric files of output_dir against golden_dir. Tolerances per
/// file come from golden_dir/tolerances.json ({"file": {"rtol":..,"atol":..}},
/// key "*" for the default); otherwise rtol = 1e-9, atol = 1e-12.
VerifyReport verify_dirs(const std::filesystem::path& golden_dir, const std::filesystem::path& output_dir);

struct ScenarioListing {
    std::filesystem::path path;
    std::string name;
    std::string experiment;
    std::string description;
};
std::vector<ScenarioListing> list_scenarios(const std::filesystem::path& dir);

}  // namespace pinv
