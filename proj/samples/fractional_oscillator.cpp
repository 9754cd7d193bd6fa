// Solves the fractional harmonic oscillator, compares the position with its
// Mittag-Leffler closed form and prints the causal and general residuals.

#include <cmath>
#include <cstdio>

#include "fracemb/fracemb.hpp"

int main() {
    using namespace fracemb;
    const FracOrder order(0.6);
    const TimeGrid grid(0.0, 2.0, 2048);
    const double y0[2] = {1.0, 0.0};

    const FdeSolution sol = solve_fde(harmonic_hamiltonian(), y0, grid, order);
    const Trajectory x = sol.x();

    std::printf("%8s %14s %14s\n", "t", "x(t)", "E_2a(-t^2a)");
    for (std::size_t i = 0; i < grid.size(); i += 256) {
        const double t = grid.node(i);
        const double exact = mittag_leffler(2.0 * order.value(), -std::pow(t, 2.0 * order.value()));
        std::printf("%8.4f %14.10f %14.10f\n", t, x(i, 0), exact);
    }

    const auto L = harmonic_lagrangian();
    const auto causal = causal_el_residual(L, x, order);
    const auto general = general_el_residual(L, x, order);
    std::printf("causal Euler-Lagrange residual  %.3e\n", causal.max_norm);
    std::printf("general Euler-Lagrange residual %.3e\n", general.max_norm);
    return 0;
}
