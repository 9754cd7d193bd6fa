#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"

namespace fracemb::cli {

/// One pass/fail check: `value <relation> tolerance`.
struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    std::string relation;  // "<=", ">=", "=="
    double tolerance = 0.0;
};

struct RunReport {
    ExperimentConfig config;
    std::vector<Check> checks;
    std::vector<std::pair<std::string, std::string>> metrics;
    std::vector<std::filesystem::path> files;
    double seconds = 0.0;

    [[nodiscard]] bool passed() const;
    [[nodiscard]] std::string str() const;

    void check(std::string name, double value, const std::string& relation, double tolerance);
    void metric(std::string key, double value);
    void metric(std::string key, std::string value);
};

/// Runs one experiment, writes its files under cfg.out (ml writes only when
/// an output directory was given) and returns the report, which is also
/// written to <out>/report.txt.
RunReport run_experiment(const ExperimentConfig& cfg);

}  // namespace fracemb::cli
