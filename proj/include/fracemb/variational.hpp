#pragma once

// Fractional action, general (left+right) and causal (left only)
// Euler-Lagrange residuals, the operator K = D_left + D_right, and the
// variation spaces used to derive the Euler-Lagrange equations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "fracemb/dynamics.hpp"
#include "fracemb/fracops.hpp"
#include "fracemb/grid.hpp"
#include "fracemb/random.hpp"
#include "fracemb/residual.hpp"
#include "fracemb/systems.hpp"

namespace fracemb {

struct ActionValue {
    double value = 0.0;
    TimeGrid grid;
    std::string lagrangian;
};

namespace detail {

inline void require_lagrangian_dim(const LagrangianSystem& L, const Trajectory& x) {
    if (x.dim() != L.dim) throw mismatch_error("trajectory dimension does not match the Lagrangian");
}

/// Samples a vector field (x, Dx, t) -> R^d along the trajectory.
template <typename Field>
Trajectory along(const Trajectory& x, const Trajectory& dx, Field&& field) {
    Trajectory out(x.grid(), x.dim());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Vec v = field(x.row(i), dx.row(i), x.grid().node(i));
        std::copy(v.begin(), v.end(), out.row(i).begin());
    }
    return out;
}

}  // namespace detail

/// A(E_alpha(L))(x) = Int_a^b L(x, D_left x, t) dt, trapezoid rule.
inline ActionValue action(const LagrangianSystem& L, const Trajectory& x, FracOrder order) {
    detail::require_lagrangian_dim(L, x);
    const Trajectory dx = caputo_left(x, order);
    std::vector<double> integrand(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) integrand[i] = L.lagrangian(x.row(i), dx.row(i), x.grid().node(i));
    return ActionValue{trapezoid(integrand, x.grid().step()), x.grid(), L.name};
}

/// d1 L(x, Dx, t) + D_right d2 L(x, Dx, t): stationarity over all of V_alpha.
inline ResidualReport general_el_residual(const LagrangianSystem& L, const Trajectory& x, FracOrder order,
                                          std::span<const double> initial_rate = {}) {
    detail::require_lagrangian_dim(L, x);
    const Trajectory dx = caputo_left(x, order, initial_rate);
    const Trajectory l1 = detail::along(x, dx, L.grad_x);
    const Trajectory right = caputo_right(detail::along(x, dx, L.grad_v), order);
    Trajectory r(x.grid(), x.dim());
    for (std::size_t k = 0; k < r.values().size(); ++k) r.values()[k] = l1.values()[k] + right.values()[k];
    return make_report(std::move(r), ResidualKind::general_el);
}

/// d1 L(x, Dx, t) - D_left d2 L(x, Dx, t): the causal Euler-Lagrange equation.
/// `initial_rate` is D x at t_0 when known (see caputo_left); it keeps the
/// nested derivative free of the zero convention at t_0.
inline ResidualReport causal_el_residual(const LagrangianSystem& L, const Trajectory& x, FracOrder order,
                                          std::span<const double> initial_rate = {}) {
    detail::require_lagrangian_dim(L, x);
    const Trajectory dx = caputo_left(x, order, initial_rate);
    const Trajectory l1 = detail::along(x, dx, L.grad_x);
    const Trajectory left = caputo_left(detail::along(x, dx, L.grad_v), order);
    Trajectory r(x.grid(), x.dim());
    for (std::size_t k = 0; k < r.values().size(); ++k) r.values()[k] = l1.values()[k] - left.values()[k];
    return make_report(std::move(r), ResidualKind::causal_el);
}

/// The classical Euler-Lagrange operator d1 L - d/dt d2 L written as
/// O(f, g) with f = (1, 1), g = (d1 L, -d2 L), powers (0, 1). Embedding it
/// reproduces causal_el_residual node by node.
inline OperatorSpec classical_el_operator(const LagrangianSystem& L) {
    OperatorSpec op;
    op.in_dim = L.dim;
    op.out_dim = L.dim;
    op.highest_order = 1;
    op.terms.push_back({constant_field(L.dim, 1.0), L.grad_x, 0});
    op.terms.push_back({constant_field(L.dim, 1.0),
                        [g = L.grad_v](ConstVec x, ConstVec v, double t) {
                            Vec out = g(x, v, t);
                            for (double& c : out) c = -c;
                            return out;
                        },
                        1});
    return op;
}

/// K_alpha x = D_left x + D_right x.
inline Trajectory k_alpha_apply(const Trajectory& x, FracOrder order) {
    const Trajectory l = caputo_left(x, order);
    const Trajectory r = caputo_right(x, order);
    Trajectory out(x.grid(), x.dim());
    for (std::size_t k = 0; k < out.values().size(); ++k) out.values()[k] = l.values()[k] + r.values()[k];
    return out;
}

/// <K f, g> - <f, K g> against the boundary terms predicted by fractional
/// integration by parts applied to both halves of K.
struct SymmetryDefect {
    double k_f_g = 0.0;
    double f_k_g = 0.0;
    double boundary = 0.0;
    [[nodiscard]] double defect() const { return std::abs(k_f_g - f_k_g - boundary); }
};

inline SymmetryDefect k_alpha_symmetry(const Trajectory& f, const Trajectory& g, FracOrder order) {
    require_same_grid(f, g, "k_alpha_symmetry");
    if (f.dim() != 1 || g.dim() != 1) throw mismatch_error("k_alpha_symmetry expects scalar trajectories");
    const double beta = 1.0 - order.value();
    const auto il_f = rl_integral_left(f, beta);
    const auto il_g = rl_integral_left(g, beta);
    const auto ir_f = rl_integral_right(f, beta);
    const auto ir_g = rl_integral_right(g, beta);
    const std::size_t n = f.size() - 1;
    SymmetryDefect s;
    s.k_f_g = inner_product(k_alpha_apply(f, order), g);
    s.f_k_g = inner_product(f, k_alpha_apply(g, order));
    s.boundary = (g(n, 0) * il_f(n, 0) - f(0, 0) * ir_g(0, 0)) - (f(n, 0) * il_g(n, 0) - g(0, 0) * ir_f(0, 0));
    return s;
}

/// Causal Euler-Lagrange system of L_H(x,p,v,w) = p.v - H(x,p), per node
/// [-d1H(x,p) - D p | D x - d2H(x,p)].
inline ResidualReport hamiltonian_action_residual(const HamiltonianSystem& H, const Trajectory& x, const Trajectory& p,
                                                  FracOrder order) {
    require_same_grid(x, p, "hamiltonian_action_residual");
    const std::size_t d = H.dim;
    if (x.dim() != d || p.dim() != d) throw mismatch_error("hamiltonian_action_residual: dimension mismatch");
    const Trajectory dx = caputo_left(x, order);
    const Trajectory dp = caputo_left(p, order);
    Trajectory r(x.grid(), 2 * d);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Vec h1 = H.grad_x(x.row(i), p.row(i));
        const Vec h2 = H.grad_p(x.row(i), p.row(i));
        for (std::size_t c = 0; c < d; ++c) {
            r(i, c) = -h1[c] - dp(i, c);
            r(i, d + c) = dx(i, c) - h2[c];
        }
    }
    return make_report(std::move(r), ResidualKind::canonical);
}

/// Residual of the embedded canonical equations, per node
/// [D x - d2H(x,p) | D p + d1H(x,p)].
inline ResidualReport canonical_residual(const HamiltonianSystem& H, const Trajectory& x, const Trajectory& p,
                                         FracOrder order) {
    require_same_grid(x, p, "canonical_residual");
    const std::size_t d = H.dim;
    if (x.dim() != d || p.dim() != d) throw mismatch_error("canonical_residual: dimension mismatch");
    const Trajectory dx = caputo_left(x, order);
    const Trajectory dp = caputo_left(p, order);
    Trajectory r(x.grid(), 2 * d);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const Vec h1 = H.grad_x(x.row(i), p.row(i));
        const Vec h2 = H.grad_p(x.row(i), p.row(i));
        for (std::size_t c = 0; c < d; ++c) {
            r(i, c) = dx(i, c) - h2[c];
            r(i, d + c) = dp(i, c) + h1[c];
        }
    }
    return make_report(std::move(r), ResidualKind::canonical);
}

enum class VariationSpace { v_alpha, v_alpha_restricted };

struct VariationCheck {
    bool member = false;
    double end_value = 0.0;             // h(b)
    double left_integral_at_a = 0.0;    // I_left^{1-a} h (a), identically 0 for the discrete operator
    double start_value = 0.0;           // h(a)
    double left_integral_at_b = 0.0;    // I_left^{1-a} h (b)
    double restricted_violation = 0.0;  // interior max |D_left h + D_right h|
    double restricted_tolerance = 0.0;  // 10 h^{2-a}
    Trajectory violation_profile;       // D_left h + D_right h on every node
};

inline constexpr double kVariationTolerance = 1e-8;

/// Membership of a scalar variation in V_alpha (h(b) = 0, I^{1-a} h(a) = 0)
/// or in the restricted space (additionally D_left h = -D_right h).
/// start_value and left_integral_at_b are the boundary data that enter the
/// integration-by-parts boundary terms of the action variation.
inline VariationCheck variation_space_check(const Trajectory& h, VariationSpace space, FracOrder order) {
    if (h.dim() != 1) throw mismatch_error("variation_space_check expects a scalar trajectory");
    const std::size_t n = h.size() - 1;
    const auto il = rl_integral_left(h, 1.0 - order.value());
    Trajectory profile = k_alpha_apply(h, order);
    VariationCheck c{false, h(n, 0), il(0, 0), h(0, 0), il(n, 0), 0.0, 0.0, profile};
    c.member = std::abs(c.end_value) <= kVariationTolerance && std::abs(c.left_integral_at_a) <= kVariationTolerance;
    c.restricted_tolerance = 10.0 * std::pow(h.grid().step(), 2.0 - order.value());
    const std::size_t w = interior_window(h.grid());
    for (std::size_t i = w; i + w <= n; ++i)
        c.restricted_violation = std::max(c.restricted_violation, std::abs(profile(i, 0)));
    if (space == VariationSpace::v_alpha_restricted)
        c.member = c.member && c.restricted_violation <= c.restricted_tolerance;
    return c;
}

/// Random scalar variation with h(a) = h(b) = 0 and I_left^{1-a} h (b) = 0,
/// so both boundary terms of the integration by parts vanish: a sine series
/// with uniform coefficients in [-1,1], corrected by a multiple of s(1-s).
/// Draws use substream (seed, variations, index).
inline Trajectory random_variation(const TimeGrid& grid, FracOrder order, std::uint64_t seed, std::uint64_t index,
                                   int modes = 4) {
    CounterRng rng(seed, streams::variations, index);
    std::vector<double> coef(static_cast<std::size_t>(modes));
    for (double& c : coef) c = 2.0 * rng.uniform_open() - 1.0;
    const double a = grid.a(), len = grid.b() - grid.a();
    Trajectory h = Trajectory::sample(grid, [&](double t) {
        const double s = (t - a) / len;
        double v = 0.0;
        for (std::size_t k = 0; k < coef.size(); ++k)
            v += coef[k] * std::sin(static_cast<double>(k + 1) * std::numbers::pi * s);
        return v;
    });
    const Trajectory bump = Trajectory::sample(grid, [&](double t) {
        const double s = (t - a) / len;
        return s * (1.0 - s);
    });
    const std::size_t n = grid.steps();
    h(0, 0) = 0.0;
    h(n, 0) = 0.0;
    const double beta = 1.0 - order.value();
    const double lambda = -rl_integral_left(h, beta)(n, 0) / rl_integral_left(bump, beta)(n, 0);
    for (std::size_t i = 0; i <= n; ++i) h(i, 0) += lambda * bump(i, 0);
    return h;
}

/// Central difference of the action along h against <general EL residual, h>.
struct DirectionalDerivative {
    double finite_difference = 0.0;
    double inner_product = 0.0;
    double action = 0.0;
    [[nodiscard]] double gap() const { return std::abs(finite_difference - inner_product); }
};

inline DirectionalDerivative action_directional_derivative(const LagrangianSystem& L, const Trajectory& x,
                                                           const Trajectory& h, FracOrder order, double eps = 1e-5) {
    require_same_grid(x, h, "action_directional_derivative");
    if (x.dim() != h.dim()) throw mismatch_error("variation dimension does not match trajectory");
    Trajectory plus = x, minus = x;
    for (std::size_t k = 0; k < x.values().size(); ++k) {
        plus.values()[k] += eps * h.values()[k];
        minus.values()[k] -= eps * h.values()[k];
    }
    DirectionalDerivative dd;
    dd.action = action(L, x, order).value;
    dd.finite_difference = (action(L, plus, order).value - action(L, minus, order).value) / (2.0 * eps);
    dd.inner_product = inner_product(general_el_residual(L, x, order).residual, h);
    return dd;
}

}  // namespace fracemb
