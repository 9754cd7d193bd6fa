#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "fracemb/io.hpp"

namespace fracemb::cli {

namespace {

const std::vector<std::pair<Experiment, std::string>>& experiment_table() {
    static const std::vector<std::pair<Experiment, std::string>> table{
        {Experiment::ml_eval, "ml"},
        {Experiment::frac_deriv, "frac-deriv"},
        {Experiment::solve_fde, "solve-fde"},
        {Experiment::subordinator, "subordinator"},
        {Experiment::scaling_limit, "scaling-limit"},
        {Experiment::verify_stanislavsky, "verify-stanislavsky"},
        {Experiment::verify_coherence, "verify-coherence"},
        {Experiment::verify_compatibility, "verify-compatibility"},
    };
    return table;
}

std::string trim(const std::string& s) {
    auto begin = std::find_if_not(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
    auto end = std::find_if_not(s.rbegin(), s.rend(), [](unsigned char c) { return std::isspace(c); }).base();
    return begin < end ? std::string(begin, end) : std::string();
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
    throw config_error("invalid value for '" + key + "': " + why);
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
        bad(key, "expected a finite number, got '" + text + "'");
    return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text, std::uint64_t lo, std::uint64_t hi) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
        // accept integral values written in floating notation, e.g. 1e4
        const double d = to_double(key, text);
        if (d < 0.0 || d != std::floor(d) || d > 1.8e19) bad(key, "expected a non-negative integer, got '" + text + "'");
        v = static_cast<std::uint64_t>(d);
    }
    if (v < lo || v > hi) {
        std::ostringstream os;
        os << "must lie in [" << lo << ", " << hi << "], got " << v;
        bad(key, os.str());
    }
    return v;
}

}  // namespace

std::string to_string(Experiment e) {
    for (const auto& [k, name] : experiment_table())
        if (k == e) return name;
    return "unknown";
}

Experiment parse_experiment(const std::string& name) {
    if (name == "ml-eval") return Experiment::ml_eval;
    for (const auto& [k, n] : experiment_table())
        if (n == name) return k;
    throw config_error("unknown experiment '" + name + "'");
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& entry : experiment_table()) v.push_back(entry.second);
        return v;
    }();
    return names;
}

std::string SystemSpec::str() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::free_particle: os << "free-particle(" << format_double(params[0]) << ")"; break;
        case Kind::harmonic:
            os << "harmonic(" << format_double(params[0]) << "," << format_double(params[1]) << ")";
            break;
        case Kind::quartic: os << "quartic(" << format_double(params[0]) << ")"; break;
    }
    return os.str();
}

double SystemSpec::mass() const { return kind == Kind::quartic ? 1.0 : params[0]; }

LagrangianSystem SystemSpec::lagrangian() const {
    switch (kind) {
        case Kind::free_particle: return free_particle_lagrangian(params[0]);
        case Kind::harmonic: return harmonic_lagrangian(params[0], params[1]);
        case Kind::quartic: return quartic_lagrangian(params[0]);
    }
    throw config_error("unknown system");
}

HamiltonianSystem SystemSpec::hamiltonian() const { return legendre_transform(lagrangian()); }

SystemSpec parse_system(const std::string& text) {
    const std::string t = trim(text);
    const auto open = t.find('(');
    const std::string name = trim(t.substr(0, open));
    std::vector<double> args;
    if (open != std::string::npos) {
        if (t.back() != ')') bad("system", "unbalanced parentheses in '" + text + "'");
        std::stringstream inner(t.substr(open + 1, t.size() - open - 2));
        std::string item;
        while (std::getline(inner, item, ',')) args.push_back(to_double("system", item));
    }
    SystemSpec s;
    std::vector<double> defaults;
    if (name == "free-particle") {
        s.kind = SystemSpec::Kind::free_particle;
        defaults = {1.0};
    } else if (name == "harmonic") {
        s.kind = SystemSpec::Kind::harmonic;
        defaults = {1.0, 1.0};
    } else if (name == "quartic") {
        s.kind = SystemSpec::Kind::quartic;
        defaults = {1.0};
    } else {
        bad("system", "expected free-particle, harmonic(m,omega) or quartic(lambda), got '" + text + "'");
    }
    if (args.size() > defaults.size()) bad("system", "too many parameters in '" + text + "'");
    for (std::size_t i = 0; i < args.size(); ++i) defaults[i] = args[i];
    for (double v : defaults)
        if (!(v > 0.0)) bad("system", "parameters must be positive in '" + text + "'");
    s.params = std::move(defaults);
    return s;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
    std::vector<std::pair<std::string, std::string>> e{{"experiment", to_string(kind)}, {"alpha", format_double(alpha)}};
    switch (kind) {
        case Experiment::ml_eval:
            e.emplace_back("beta", format_double(beta));
            e.emplace_back("z", format_double(z));
            return e;
        case Experiment::scaling_limit:
            e.emplace_back("c", format_double(c));
            e.emplace_back("m-paths", std::to_string(paths));
            e.emplace_back("seed", std::to_string(seed));
            e.emplace_back("workers", std::to_string(workers));
            e.emplace_back("out", out.string());
            return e;
        default: break;
    }
    e.emplace_back("a", format_double(a));
    e.emplace_back("b", format_double(b));
    e.emplace_back("n", std::to_string(n));
    if (kind == Experiment::frac_deriv) {
        e.emplace_back("function", function);
    } else if (kind != Experiment::subordinator) {
        e.emplace_back("system", system.str());
        e.emplace_back("x0", format_double(x0));
        e.emplace_back("p0", format_double(p0));
    }
    if (kind == Experiment::subordinator || kind == Experiment::verify_stanislavsky ||
        kind == Experiment::verify_compatibility || kind == Experiment::verify_coherence) {
        e.emplace_back("m-paths", std::to_string(paths));
        e.emplace_back("seed", std::to_string(seed));
    }
    if (kind == Experiment::subordinator) e.emplace_back("save-paths", std::to_string(save_paths));
    e.emplace_back("workers", std::to_string(workers));
    e.emplace_back("out", out.string());
    return e;
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{"alpha", "beta",    "z",      "a",          "b",        "n",
                                               "m-paths", "seed",  "system", "x0",         "p0",       "c",
                                               "save-paths", "function", "out", "workers"};
    return keys;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot read config file " + path.string());
    std::map<std::string, std::string> settings;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end())
            throw config_error(path.string() + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        settings[key] = trim(line.substr(eq + 1));
    }
    return settings;
}

ExperimentConfig parse_config(Experiment kind, const std::map<std::string, std::string>& settings) {
    for (const auto& [key, value] : settings)
        if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end())
            throw config_error("unknown key '" + key + "'");
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        const auto it = settings.find(key);
        if (it == settings.end()) return std::nullopt;
        return it->second;
    };

    ExperimentConfig cfg;
    cfg.kind = kind;
    if (auto v = get("alpha")) cfg.alpha = to_double("alpha", *v);
    if (kind == Experiment::ml_eval) {
        if (!(cfg.alpha > 0.0)) bad("alpha", "alpha must be positive for Mittag-Leffler evaluation");
    } else if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        bad("alpha", "alpha must lie in (0,1), got " + format_double(cfg.alpha));
    }
    if (auto v = get("beta")) cfg.beta = to_double("beta", *v);
    if (auto v = get("z")) cfg.z = to_double("z", *v);

    const bool long_horizon = kind == Experiment::verify_stanislavsky || kind == Experiment::verify_compatibility;
    cfg.b = long_horizon ? 2.0 : 1.0;
    if (auto v = get("a")) cfg.a = to_double("a", *v);
    if (auto v = get("b")) cfg.b = to_double("b", *v);
    if (!(cfg.b > cfg.a)) bad("b", "need b > a, got a=" + format_double(cfg.a) + " b=" + format_double(cfg.b));
    const bool stochastic = kind == Experiment::subordinator || kind == Experiment::verify_stanislavsky ||
                            kind == Experiment::verify_compatibility;
    if (stochastic && cfg.a != 0.0) bad("a", "internal-time experiments need a = 0");
    if (auto v = get("n")) cfg.n = to_unsigned("n", *v, 2, 1u << 20);
    if (auto v = get("m-paths")) cfg.paths = to_unsigned("m-paths", *v, 1, 100000000);
    if (kind == Experiment::scaling_limit) {
        if (!get("m-paths")) cfg.paths = 10000;
        if (cfg.paths < 1000) bad("m-paths", "scaling-limit needs at least 1000 samples");
    }
    if (auto v = get("seed")) cfg.seed = to_unsigned("seed", *v, 0, UINT64_MAX);
    cfg.system = parse_system(get("system").value_or("harmonic"));
    if (cfg.system.kind == SystemSpec::Kind::free_particle) {
        cfg.x0 = 0.0;
        cfg.p0 = 1.0;
    }
    if (auto v = get("x0")) cfg.x0 = to_double("x0", *v);
    if (auto v = get("p0")) cfg.p0 = to_double("p0", *v);
    if (auto v = get("c")) cfg.c = to_double("c", *v);
    if (kind == Experiment::scaling_limit && !(cfg.c >= 100.0))
        bad("c", "scaling-limit needs c >= 100, got " + format_double(cfg.c));
    if (auto v = get("save-paths")) cfg.save_paths = to_unsigned("save-paths", *v, 0, 100000);
    if (auto v = get("function")) cfg.function = trim(*v);
    if (auto v = get("out")) {
        cfg.out = *v;
        cfg.out_given = true;
    }
    cfg.workers = std::max(1u, std::thread::hardware_concurrency());
    if (auto v = get("workers")) cfg.workers = static_cast<unsigned>(to_unsigned("workers", *v, 1, 1024));
    return cfg;
}

}  // namespace fracemb::cli
