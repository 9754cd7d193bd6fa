#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fracemb/dynamics.hpp"
#include "fracemb/error.hpp"
#include "fracemb/systems.hpp"

namespace fracemb::cli {

/// Raised for malformed or out-of-range configuration values.
class config_error : public error {
public:
    using error::error;
};

enum class Experiment {
    ml_eval,
    frac_deriv,
    solve_fde,
    subordinator,
    scaling_limit,
    verify_stanislavsky,
    verify_coherence,
    verify_compatibility,
};

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);
const std::vector<std::string>& experiment_names();

/// Built-in systems: free-particle(m), harmonic(m, omega), quartic(lambda).
struct SystemSpec {
    enum class Kind { free_particle, harmonic, quartic } kind = Kind::harmonic;
    std::vector<double> params;  // resolved, defaults filled

    [[nodiscard]] std::string str() const;
    [[nodiscard]] double mass() const;
    [[nodiscard]] LagrangianSystem lagrangian() const;
    [[nodiscard]] HamiltonianSystem hamiltonian() const;
    [[nodiscard]] bool quadratic() const { return kind != Kind::quartic; }
};

SystemSpec parse_system(const std::string& text);

struct ExperimentConfig {
    Experiment kind = Experiment::verify_stanislavsky;
    double alpha = 0.5;
    double beta = 1.0;  // ml only
    double z = 0.0;     // ml only
    double a = 0.0;
    double b = 1.0;
    std::size_t n = 2048;
    std::size_t paths = 10000;
    std::uint64_t seed = 42;
    SystemSpec system;
    double x0 = 1.0;
    double p0 = 0.0;
    double c = 1e4;               // scaling-limit horizon
    std::size_t save_paths = 16;  // subordinator: paths written to paths.csv
    std::string function = "power(2)";
    std::filesystem::path out = "fracemb-out";
    bool out_given = false;
    unsigned workers = 1;

    /// key=value echo in a fixed order.
    [[nodiscard]] std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Keys accepted in config files and (with a leading "--") as flags.
const std::vector<std::string>& config_keys();

/// Reads a flat key=value file. '#' starts a comment; blank lines are skipped.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Builds a validated config for `kind` from raw key=value settings, filling
/// defaults for missing keys.
ExperimentConfig parse_config(Experiment kind, const std::map<std::string, std::string>& settings);

}  // namespace fracemb::cli
