#pragma once

// Discrete fractional operators on uniform grids.
//
//   caputo_left      L1 scheme, O(h^{2-alpha})
//   caputo_right     mirror image of caputo_left
//   rl_integral_*    product trapezoid: weakly singular kernel integrated
//                    exactly against the piecewise-linear interpolant
//
// All operators act componentwise and sum in a fixed order, so results do
// not depend on how callers parallelize over components.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fracemb/error.hpp"
#include "fracemb/grid.hpp"
#include "fracemb/special_functions.hpp"

namespace fracemb {

namespace detail {

/// (j+1)^p - j^p without cancellation for large j.
inline double forward_power_difference(std::size_t j, double p) {
    if (j == 0) return 1.0;
    const double dj = static_cast<double>(j);
    return std::pow(dj, p) * std::expm1(p * std::log1p(1.0 / dj));
}

/// (k+1)^p - 2 k^p + (k-1)^p for k >= 1.
inline double second_power_difference(std::size_t k, double p) {
    const double dk = static_cast<double>(k);
    if (k == 1) return std::exp2(p) - 2.0;
    return std::pow(dk, p) * (std::expm1(p * std::log1p(1.0 / dk)) + std::expm1(p * std::log1p(-1.0 / dk)));
}

/// L1 weights w_j = (j+1)^{1-alpha} - j^{1-alpha}, j = 0..n-1.
inline std::vector<double> l1_weights(std::size_t n, double alpha) {
    std::vector<double> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = forward_power_difference(j, 1.0 - alpha);
    return w;
}

inline std::vector<double> l1_left(std::span<const double> x, double h, double alpha) {
    const std::size_t n = x.size() - 1;
    std::vector<double> out(x.size(), 0.0);
    const auto w = l1_weights(n, alpha);
    std::vector<double> dx(x.size(), 0.0);
    for (std::size_t i = 1; i <= n; ++i) dx[i] = x[i] - x[i - 1];
    const double scale = std::pow(h, -alpha) / std::tgamma(2.0 - alpha);
    for (std::size_t m = 1; m <= n; ++m) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) acc += w[j] * dx[m - j];
        out[m] = scale * acc;
    }
    return out;
}

/// Product-trapezoid left Riemann-Liouville integral of order beta in [0,1].
inline std::vector<double> rl_left(std::span<const double> x, double h, double beta) {
    const std::size_t n = x.size() - 1;
    std::vector<double> out(x.size(), 0.0);
    if (beta == 0.0) {
        std::copy(x.begin(), x.end(), out.begin());
        return out;
    }
    // interior weights depend on l = m - j only
    std::vector<double> interior(n + 1, 0.0);
    for (std::size_t l = 1; l <= n; ++l) interior[l] = second_power_difference(l, beta + 1.0);
    const double scale = std::pow(h, beta) / std::tgamma(beta + 2.0);
    for (std::size_t m = 1; m <= n; ++m) {
        const long double dm = static_cast<long double>(m);
        const long double first =
            std::pow(dm, static_cast<long double>(beta)) *
            ((dm - 1.0L) * std::expm1(static_cast<long double>(beta) * std::log1p(-1.0L / dm)) + beta);
        double acc = static_cast<double>(first) * x[0];
        for (std::size_t j = 1; j < m; ++j) acc += interior[m - j] * x[j];
        acc += x[m];
        out[m] = scale * acc;
    }
    return out;
}

template <typename Kernel>
std::vector<double> mirrored(std::span<const double> x, Kernel&& kernel) {
    std::vector<double> rev(x.rbegin(), x.rend());
    auto r = kernel(std::span<const double>(rev));
    std::reverse(r.begin(), r.end());
    return r;
}

template <typename Kernel>
Trajectory componentwise(const Trajectory& x, Kernel&& kernel) {
    Trajectory out(x.grid(), x.dim());
    for (std::size_t c = 0; c < x.dim(); ++c) {
        const auto comp = x.component(c);
        out.set_component(c, kernel(std::span<const double>(comp)));
    }
    return out;
}

}  // namespace detail

/// Left Caputo derivative (L1 scheme); zero at t_0.
inline Trajectory caputo_left(const Trajectory& x, FracOrder order) {
    const double h = x.grid().step();
    return detail::componentwise(x, [&](std::span<const double> c) { return detail::l1_left(c, h, order.value()); });
}

/// Left Caputo derivative with the t_0 value replaced by a known limit
/// (e.g. the right-hand side at the initial state of a fractional ODE). An
/// empty span keeps the zero convention. Nested derivatives of the result
/// then see no artificial jump at t_0.
inline Trajectory caputo_left(const Trajectory& x, FracOrder order, std::span<const double> initial_rate) {
    Trajectory out = caputo_left(x, order);
    if (initial_rate.empty()) return out;
    if (initial_rate.size() != x.dim()) throw mismatch_error("initial rate dimension does not match trajectory");
    std::copy(initial_rate.begin(), initial_rate.end(), out.row(0).begin());
    return out;
}

/// Right Caputo derivative; zero at t_n. Equals caputo_left of the
/// time-reflected trajectory, read back at a + b - t.
inline Trajectory caputo_right(const Trajectory& x, FracOrder order) {
    const double h = x.grid().step();
    return detail::componentwise(x, [&](std::span<const double> c) {
        return detail::mirrored(c, [&](std::span<const double> r) { return detail::l1_left(r, h, order.value()); });
    });
}

/// Left Riemann-Liouville integral of order beta in [0,1] (beta = 0 is the identity).
inline Trajectory rl_integral_left(const Trajectory& x, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw domain_error("fractional integral order must lie in [0,1]");
    const double h = x.grid().step();
    return detail::componentwise(x, [&](std::span<const double> c) { return detail::rl_left(c, h, beta); });
}

inline Trajectory rl_integral_left(const Trajectory& x, FracOrder order) {
    return rl_integral_left(x, order.value());
}

inline Trajectory rl_integral_right(const Trajectory& x, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw domain_error("fractional integral order must lie in [0,1]");
    const double h = x.grid().step();
    return detail::componentwise(x, [&](std::span<const double> c) {
        return detail::mirrored(c, [&](std::span<const double> r) { return detail::rl_left(r, h, beta); });
    });
}

inline Trajectory rl_integral_right(const Trajectory& x, FracOrder order) {
    return rl_integral_right(x, order.value());
}

/// Composite trapezoid rule of uniformly sampled values.
inline double trapezoid(std::span<const double> f, double h) {
    if (f.size() < 2) return 0.0;
    double acc = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) acc += f[i];
    return acc * h;
}

/// <f, g> = Int_a^b f . g dt (trapezoid, summed over components).
inline double inner_product(const Trajectory& f, const Trajectory& g) {
    require_same_grid(f, g, "inner_product");
    if (f.dim() != g.dim()) throw mismatch_error("inner_product: dimension mismatch");
    std::vector<double> prod(f.size(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t c = 0; c < f.dim(); ++c) prod[i] += f(i, c) * g(i, c);
    return trapezoid(prod, f.grid().step());
}

/// Pieces of the fractional integration-by-parts identity
///   Int (D_left f) g = Int f (D_right g) + g(b) I_left^{1-a} f(b) - f(a) I_right^{1-a} g(a).
struct IbpTerms {
    double lhs = 0.0;
    double rhs_integral = 0.0;
    double boundary = 0.0;
    [[nodiscard]] double residual() const { return std::abs(lhs - rhs_integral - boundary); }
};

inline IbpTerms ibp_terms(const Trajectory& f, const Trajectory& g, FracOrder order) {
    require_same_grid(f, g, "ibp_residual");
    if (f.dim() != 1 || g.dim() != 1) throw mismatch_error("ibp_residual expects scalar trajectories");
    const double a = order.value();
    const auto df = caputo_left(f, order);
    const auto dg = caputo_right(g, order);
    const auto i_f = rl_integral_left(f, 1.0 - a);
    const auto i_g = rl_integral_right(g, 1.0 - a);
    const std::size_t last = f.size() - 1;
    IbpTerms t;
    t.lhs = inner_product(df, g);
    t.rhs_integral = inner_product(f, dg);
    t.boundary = g(last, 0) * i_f(last, 0) - f(0, 0) * i_g(0, 0);
    return t;
}

inline double ibp_residual(const Trajectory& f, const Trajectory& g, FracOrder order) {
    return ibp_terms(f, g, order).residual();
}

// ---------------------------------------------------------------------------
// Fractional embedding of differential operators
//   O(f,g)(x)(t) = sum_i f_i . (d/dt)^{p_i} g_i (x, x', t),  p_i, k in {0,1}
// ---------------------------------------------------------------------------

/// Map (x, v, t) -> vector, where v is the derivative slot.
using Field = std::function<std::vector<double>(std::span<const double>, std::span<const double>, double)>;

struct OperatorTerm {
    Field f;
    Field g;
    int power = 0;
};

struct OperatorSpec {
    std::size_t in_dim = 1;
    std::size_t out_dim = 1;
    int highest_order = 1;  // k: derivative order inside the arguments
    std::vector<OperatorTerm> terms;
};

/// Evaluator of E_alpha(O(f,g)): every d/dt replaced by the left Caputo
/// derivative. With FracOrder::classical_limit() this is the classical
/// operator discretized by backward differences.
class EmbeddedOperator {
public:
    EmbeddedOperator(OperatorSpec op, FracOrder order) : op_(std::move(op)), order_(order) {
        if (op_.highest_order < 0 || op_.highest_order > 1)
            throw unsupported_power_error("embedding supports derivative order k in {0,1} inside arguments");
        for (const auto& t : op_.terms)
            if (t.power < 0 || t.power > 1)
                throw unsupported_power_error("embedding supports derivative powers in {0,1}");
    }

    /// `initial_rate`, when given, is the value of D x at t_0 (see caputo_left).
    [[nodiscard]] Trajectory operator()(const Trajectory& x, std::span<const double> initial_rate = {}) const {
        if (x.dim() != op_.in_dim) throw mismatch_error("embedded operator: input dimension mismatch");
        const TimeGrid& grid = x.grid();
        const Trajectory v =
            op_.highest_order == 1 ? caputo_left(x, order_, initial_rate) : Trajectory(grid, op_.in_dim);
        Trajectory out(grid, op_.out_dim);
        for (const auto& term : op_.terms) {
            Trajectory g_vals(grid, op_.out_dim);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const auto gv = term.g(x.row(i), v.row(i), grid.node(i));
                if (gv.size() != op_.out_dim) throw mismatch_error("embedded operator: g has wrong output size");
                std::copy(gv.begin(), gv.end(), g_vals.row(i).begin());
            }
            if (term.power == 1) g_vals = caputo_left(g_vals, order_);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const auto fv = term.f(x.row(i), v.row(i), grid.node(i));
                if (fv.size() != op_.out_dim) throw mismatch_error("embedded operator: f has wrong output size");
                for (std::size_t c = 0; c < op_.out_dim; ++c) out(i, c) += fv[c] * g_vals(i, c);
            }
        }
        return out;
    }

    [[nodiscard]] const OperatorSpec& spec() const noexcept { return op_; }
    [[nodiscard]] FracOrder order() const noexcept { return order_; }

private:
    OperatorSpec op_;
    FracOrder order_;
};

[[nodiscard]] inline EmbeddedOperator embed_operator(OperatorSpec op, FracOrder order) {
    return EmbeddedOperator(std::move(op), order);
}

/// Constant field returning `value` in every one of `dim` components.
inline Field constant_field(std::size_t dim, double value) {
    return [dim, value](std::span<const double>, std::span<const double>, double) {
        return std::vector<double>(dim, value);
    };
}

}  // namespace fracemb
