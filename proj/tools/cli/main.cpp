#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "config.hpp"
#include "experiments.hpp"

namespace {

struct FlagSet {
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    std::string config_file;
};

void add_flags(CLI::App& sub, FlagSet& flags) {
    static const std::map<std::string, std::string> help{
        {"alpha", "fractional order in (0,1) (Mittag-Leffler: any positive value)"},
        {"beta", "second Mittag-Leffler parameter"},
        {"z", "Mittag-Leffler argument"},
        {"a", "left end of the time grid"},
        {"b", "right end of the time grid"},
        {"n", "number of grid steps"},
        {"m-paths", "Monte Carlo path count"},
        {"seed", "random seed"},
        {"system", "free-particle(m) | harmonic(m,omega) | quartic(lambda)"},
        {"x0", "initial position"},
        {"p0", "initial momentum"},
        {"c", "renewal horizon for the scaling limit"},
        {"save-paths", "number of internal-time paths written to CSV"},
        {"function", "power(k) | exp | sin"},
        {"out", "output directory"},
        {"workers", "worker threads (results do not depend on it)"},
    };
    for (const auto& key : fracemb::cli::config_keys()) {
        auto* opt = sub.add_option("--" + key, flags.values[key], help.at(key));
        flags.options[key] = opt;
    }
    sub.add_option("--config", flags.config_file, "key=value configuration file (flags override it)");
}

}  // namespace

int main(int argc, char** argv) {
    using namespace fracemb::cli;
    CLI::App app{"Fractional embedding experiments: Mittag-Leffler values, Caputo operators, fractional "
                 "canonical flows, internal-time subordination and their consistency checks."};
    app.require_subcommand(1);

    std::map<std::string, FlagSet> flagsets;
    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> descriptions{
        {"ml", "evaluate E_{alpha,beta}(z)"},
        {"frac-deriv", "left and right Caputo derivatives of a test function"},
        {"solve-fde", "solve the fractional canonical equations of a built-in system"},
        {"subordinator", "simulate the inverse stable subordinator S(t)"},
        {"scaling-limit", "compare rescaled renewal counts with S(1)"},
        {"verify-stanislavsky", "Monte Carlo subordination against the fractional solver"},
        {"verify-coherence", "causal versus general Euler-Lagrange residuals"},
        {"verify-compatibility", "momentum identity and causal equation for subordinated means"},
    };
    for (const auto& name : experiment_names()) {
        auto* sub = app.add_subcommand(name, descriptions.at(name));
        if (name == "ml") sub->alias("ml-eval");
        add_flags(*sub, flagsets[name]);
        subs[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    for (const auto& [name, sub] : subs) {
        if (!sub->parsed()) continue;
        FlagSet& flags = flagsets[name];
        try {
            std::map<std::string, std::string> settings;
            if (!flags.config_file.empty()) settings = read_config_file(flags.config_file);
            for (const auto& [key, opt] : flags.options)
                if (opt->count() > 0) settings[key] = flags.values[key];
            const ExperimentConfig cfg = parse_config(parse_experiment(name), settings);
            const RunReport report = run_experiment(cfg);
            if (cfg.kind != Experiment::ml_eval) std::cout << report.str();
            return report.passed() ? 0 : 1;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    }
    return 2;
}
