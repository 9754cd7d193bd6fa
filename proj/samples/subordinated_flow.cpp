// Averages the classical oscillator over internal-time paths and checks the
// mean against the fractional canonical solver.

#include <cstdio>
#include <thread>

#include "fracemb/fracemb.hpp"

int main() {
    using namespace fracemb;
    const FracOrder order(0.7);
    const TimeGrid grid(0.0, 2.0, 64);
    const double y0[2] = {1.0, 0.0};

    SubordinationOptions opts;
    opts.workers = std::max(1u, std::thread::hardware_concurrency());
    const auto report = verify_stanislavsky(harmonic_hamiltonian(), y0, grid, order, 20000, 42, opts);

    std::printf("%8s %12s %12s %12s\n", "t", "mean x", "stderr", "solver x");
    for (std::size_t i = 0; i < grid.size(); i += 8)
        std::printf("%8.4f %12.6f %12.6f %12.6f\n", grid.node(i), report.observable.mean(i, 0),
                    report.observable.stderr(i, 0), report.fde.y(i, 0));
    std::printf("interior nodes within budget: %.3f (%s)\n", report.fraction_within_budget,
                report.passed() ? "agree" : "disagree");
    return report.passed() ? 0 : 1;
}
