// Acceptance gate: one line per criterion, exit status 0 iff all pass.
// Usage: fracemb_acceptance [work-dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "experiments.hpp"
#include "fracemb/fracemb.hpp"

using namespace fracemb;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

Outcome mittag_leffler_suite() {
    double e1 = 0.0;
    for (int k = 0; k <= 1500; ++k) {
        const double z = -10.0 + 0.01 * k;
        e1 = std::max(e1, std::abs(mittag_leffler(1.0, z) - std::exp(z)));
    }
    double e2 = 0.0;
    for (int k = 0; k <= 700; ++k) {
        const double z = 0.01 * k;
        e2 = std::max(e2, std::abs(mittag_leffler(2.0, -z * z) - std::cos(z)));
    }
    const double half = mittag_leffler(0.5, -1.0);
    const double erfc_oracle = std::exp(1.0) * std::erfc(1.0);
    const double e3 = std::max(std::abs(half - 0.4275835762), std::abs(half - erfc_oracle));
    return {e1 <= 1e-10 && e2 <= 1e-10 && e3 <= 1e-8,
            "max|E_1-exp|=" + fmt("%.2e", e1) + " max|E_2(-z^2)-cos|=" + fmt("%.2e", e2) +
                " |E_0.5(-1)-oracle|=" + fmt("%.2e", e3)};
}

Outcome operator_convergence() {
    const FracOrder order(0.5);
    std::vector<double> errors;
    for (std::size_t n : {128u, 256u, 512u, 1024u}) {
        const TimeGrid g(0.0, 1.0, n);
        const auto d = caputo_left(Trajectory::sample(g, [](double t) { return t * t; }), order);
        double e = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            e = std::max(e, std::abs(d(i, 0) - 2.0 * std::pow(g.node(i), 1.5) / gamma_fn(2.5)));
        errors.push_back(e);
    }
    double order_min = 1e9;
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) order_min = std::min(order_min, std::log2(errors[k] / errors[k + 1]));

    const TimeGrid g(0.0, 1.0, 1024);
    const auto c = Trajectory::sample(g, [](double) { return 3.25; });
    bool constants_exact = true;
    for (const auto& t : {caputo_left(c, order), caputo_right(c, order)})
        for (double v : t.values()) constants_exact = constants_exact && v == 0.0;

    const auto f = Trajectory::sample(g, [](double t) { return std::sin(3.0 * t); });
    const auto h = Trajectory::sample(g, [](double t) { return t * t * t - t; });
    Trajectory comb(g, 1);
    for (std::size_t i = 0; i < g.size(); ++i) comb(i, 0) = 2.0 * f(i, 0) - 0.5 * h(i, 0);
    double lin = 0.0;
    for (auto op : {&caputo_left, &caputo_right}) {
        const auto lhs = op(comb, order), df = op(f, order), dh = op(h, order);
        for (std::size_t i = 0; i < g.size(); ++i)
            lin = std::max(lin, std::abs(lhs(i, 0) - (2.0 * df(i, 0) - 0.5 * dh(i, 0))));
    }
    return {order_min >= 1.4 && constants_exact && lin <= 1e-12,
            "observed order min=" + fmt("%.3f", order_min) + " constants exact=" + (constants_exact ? "yes" : "no") +
                " linearity defect=" + fmt("%.2e", lin)};
}

Outcome ibp() {
    const TimeGrid g(0.0, 1.0, 2048);
    const double r1 = ibp_residual(Trajectory::sample(g, [](double t) { return t; }),
                                   Trajectory::sample(g, [](double t) { return (1 - t) * (1 - t); }), FracOrder(0.5));
    const double r2 = ibp_residual(Trajectory::sample(g, [](double t) { return t * t; }),
                                   Trajectory::sample(g, [](double t) { return 1 - t; }), FracOrder(0.3));
    return {r1 <= 5e-3 && r2 <= 5e-3, "residuals " + fmt("%.2e", r1) + ", " + fmt("%.2e", r2)};
}

Outcome fde_solver() {
    const TimeGrid g(0.0, 1.0, 4096);
    const FracOrder half(0.5);
    const double y0r[2] = {1.0, 0.0};
    const auto relax = solve_fde(relaxation_hamiltonian(1.0), y0r, g, half);
    const double e1 = std::abs(relax.y(4096, 0) - mittag_leffler(0.5, -1.0));
    const auto osc = solve_fde(harmonic_hamiltonian(), y0r, g, half);
    const double e2 = std::abs(osc.y(4096, 0) - mittag_leffler(1.0, -1.0));

    const TimeGrid period(0.0, 2.0 * std::numbers::pi, 4096);
    const auto near_one = solve_fde(harmonic_hamiltonian(), y0r, period, FracOrder(0.999));
    const auto classical = solve_classical(harmonic_hamiltonian(), y0r, period);
    double e3 = 0.0;
    for (std::size_t i = 0; i < period.size(); ++i)
        for (std::size_t c = 0; c < 2; ++c) e3 = std::max(e3, std::abs(near_one.y(i, c) - classical(i, c)));
    return {e1 <= 5e-4 && e2 <= 5e-4 && e3 <= 2e-2,
            "relaxation err=" + fmt("%.2e", e1) + " oscillator err=" + fmt("%.2e", e2) +
                " alpha=0.999 vs classical=" + fmt("%.2e", e3)};
}

Outcome internal_time_laws() {
    const FracOrder order(0.5);
    const TimeGrid g(0.0, 2.0, 4);  // nodes 0, 0.5, 1, 1.5, 2
    const auto ens = inverse_subordinator_paths(order, g, 10000, default_tau_step(order, g), 42);
    double worst = 0.0;  // max |deviation| / stderr over the lattice
    bool ok = true;
    for (double v : {0.5, 1.0, 2.0}) {
        const auto st = ensemble_mean(map_values(ens, [v](double s) { return std::exp(-v * s); }));
        for (std::size_t i : {1u, 2u, 4u}) {
            const double t = g.node(i);
            const double dev = std::abs(st.mean[i] - mittag_leffler(0.5, -v * std::sqrt(t)));
            ok = ok && dev <= 3.0 * st.stderr[i];
            worst = std::max(worst, dev / st.stderr[i]);
        }
    }
    const auto s = ensemble_mean(ens);
    const double moment_dev = std::abs(s.mean[2] - 1.0 / gamma_fn(1.5));
    const bool moment_ok = moment_dev <= 3.0 * s.stderr[2];
    return {ok && moment_ok, "Laplace lattice worst deviation=" + fmt("%.2f", worst) + " stderr; E[S(1)]=" +
                                 fmt("%.4f", s.mean[2]) + " (" + fmt("%.2f", moment_dev / s.stderr[2]) + " stderr)"};
}

Outcome scaling_limit() {
    std::string detail;
    bool ok = true;
    for (double alpha : {0.5, 0.8}) {
        const WaitingTimeLaw law(FracOrder(alpha), 1.0);
        const auto r = scaling_limit_check(law, 1e4, 10000, 42);
        ok = ok && r.ks < 0.05;
        // informational: the same statistic averaged over other seeds shows the margin
        RunningStats spread;
        for (std::uint64_t seed = 1; seed <= 4; ++seed) spread.add(scaling_limit_check(law, 1e4, 10000, seed).ks);
        detail += "KS(alpha=" + fmt("%.1f", alpha) + ")=" + fmt("%.4f", r.ks) + " [seeds 1-4 mean " +
                  fmt("%.4f", spread.mean) + "] ";
    }
    return {ok, detail};
}

Outcome stanislavsky() {
    const TimeGrid g(0.0, 2.0, 2048);
    const double y0[2] = {1.0, 0.0};
    const auto r = verify_stanislavsky(harmonic_hamiltonian(), y0, g, FracOrder(0.5), 10000, 42);
    return {r.passed(), "fraction within 3 stderr + 5e-3=" + fmt("%.4f", r.fraction_within_budget) +
                            " (within 3 stderr alone=" + fmt("%.4f", r.fraction_within_stderr) + ")"};
}

Outcome coherence() {
    const TimeGrid g(0.0, 1.0, 4096);
    const FracOrder order(0.5);
    const double y0[2] = {1.0, 0.0};
    const auto L = harmonic_lagrangian();
    const auto sol = solve_fde(legendre_transform(L), y0, g, order);
    const auto causal = causal_el_residual(L, sol.x(), order);
    const auto general = general_el_residual(L, sol.x(), order);
    const auto embedded = embed_operator(classical_el_operator(L), order)(sol.x());
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        diff = std::max(diff, std::abs(causal.residual(i, 0) - embedded(i, 0)));
        scale = std::max(scale, std::abs(causal.residual(i, 0)));
    }
    const bool ok = causal.max_norm <= 5e-3 && general.max_norm >= 0.1 &&
                    general.max_norm >= 10.0 * causal.max_norm && diff <= 1e-12 * (1.0 + scale);
    return {ok, "causal=" + fmt("%.2e", causal.max_norm) + " general=" + fmt("%.3f", general.max_norm) +
                    " embedded-vs-causal=" + fmt("%.1e", diff)};
}

Outcome variational_identity() {
    const TimeGrid g(0.0, 1.0, 4096);
    const FracOrder order(0.5);
    const double y0[2] = {1.0, 0.0};
    const auto L = harmonic_lagrangian();
    const auto x = solve_fde(legendre_transform(L), y0, g, order).x();
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 5; ++k) {
        const auto h = random_variation(g, order, 42, k);
        if (!variation_space_check(h, VariationSpace::v_alpha, order).member) return {false, "variation not in V_alpha"};
        const auto dd = action_directional_derivative(L, x, h, order);
        worst = std::max(worst, dd.gap() / (1.0 + std::abs(dd.action)));
    }
    return {worst <= 1e-4, "max gap/(1+|action|)=" + fmt("%.2e", worst)};
}

Outcome compatibility() {
    const TimeGrid g(0.0, 2.0, 2048);
    const FracOrder order(0.5);
    const double y0[2] = {1.0, 0.0};
    const auto c = verify_compatibility(harmonic_lagrangian(), y0, g, order, 10000, 42);
    const auto quartic = quartic_hamiltonian();
    const auto gap = commutation_gap(quartic, subordinate_flow(quartic, y0, g, order, 10000, 42));
    const bool ok = c.momentum.passed && c.causal.passed && gap.max_significance > 10.0;
    return {ok, "momentum fraction=" + fmt("%.4f", c.momentum.fraction_within) +
                    " causal fraction=" + fmt("%.4f", c.causal.fraction_within) +
                    " quartic commutation gap=" + fmt("%.1f", gap.max_significance) + " stderr"};
}

std::map<std::string, std::string> read_tree(const std::filesystem::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto ext = e.path().extension().string();
        if (ext != ".csv" && ext != ".meta") continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[std::filesystem::relative(e.path(), dir).string()] =
            std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return files;
}

Outcome reproducibility(const std::filesystem::path& work) {
    using namespace fracemb::cli;
    const std::vector<std::pair<Experiment, std::map<std::string, std::string>>> runs{
        {Experiment::frac_deriv, {{"n", "512"}}},
        {Experiment::solve_fde, {{"n", "512"}}},
        {Experiment::subordinator, {{"n", "512"}, {"m-paths", "2000"}}},
        {Experiment::scaling_limit, {{"c", "1000"}, {"m-paths", "2000"}}},
        {Experiment::verify_stanislavsky, {{"n", "512"}, {"m-paths", "2000"}}},
        {Experiment::verify_coherence, {{"n", "512"}}},
        {Experiment::verify_compatibility, {{"n", "512"}, {"m-paths", "2000"}}},
    };
    std::filesystem::remove_all(work);
    std::size_t compared = 0;
    for (const auto& [kind, base] : runs) {
        std::vector<std::map<std::string, std::string>> trees;
        for (const char* workers : {"1", "3"}) {
            auto settings = base;
            settings["workers"] = workers;
            const auto dir = work / (to_string(kind) + "-w" + workers);
            settings["out"] = dir.string();
            run_experiment(parse_config(kind, settings));
            trees.push_back(read_tree(dir));
        }
        if (trees[0].empty() || trees[0] != trees[1]) return {false, to_string(kind) + " outputs differ"};
        compared += trees[0].size();
    }
    return {true, std::to_string(compared) + " files byte-identical across worker counts 1 and 3"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path work = argc > 1 ? argv[1] : "acceptance-work";
    struct Criterion {
        int id;
        std::string name;
        double limit_seconds;  // 0: none
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Mittag-Leffler oracle suite", 1.0, mittag_leffler_suite},
        {2, "fractional-operator convergence", 5.0, operator_convergence},
        {3, "integration-by-parts residual", 5.0, ibp},
        {4, "fractional ODE solver", 10.0, fde_solver},
        {5, "internal-time laws", 60.0, internal_time_laws},
        {6, "scaling limit", 120.0, scaling_limit},
        {7, "subordination equals fractional solution", 120.0, stanislavsky},
        {8, "coherence dichotomy", 10.0, coherence},
        {9, "variational identity", 10.0, variational_identity},
        {10, "compatibility of subordinated means", 120.0, compatibility},
        {11, "reproducibility", 0.0, [&] { return reproducibility(work); }},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = c.limit_seconds <= 0.0 || secs < c.limit_seconds;
        const bool passed = o.passed && in_time;
        failures += !passed;
        std::string timing = fmt("%.2f s", secs);
        if (c.limit_seconds > 0.0) timing += " < " + fmt("%.0f s", c.limit_seconds) + (in_time ? "" : " EXCEEDED");
        std::printf("criterion %2d %s  %s: %s [%s]\n", c.id, passed ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(),
                    timing.c_str());
        std::fflush(stdout);
    }
    std::printf("acceptance: %zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures),
                criteria.size());
    return failures == 0 ? 0 : 1;
}
