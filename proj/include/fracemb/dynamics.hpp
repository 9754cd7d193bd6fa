#pragma once

// Legendre transform, the Lagrangian-Hamiltonian link F_LH, and solvers for
// the classical and the Caputo-fractional canonical equations.

#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "fracemb/error.hpp"
#include "fracemb/fracops.hpp"
#include "fracemb/grid.hpp"
#include "fracemb/residual.hpp"
#include "fracemb/systems.hpp"

namespace fracemb {

namespace detail {

inline double max_abs(const Vec& v) {
    double m = 0.0;
    for (double c : v) m = std::max(m, std::abs(c));
    return m;
}

/// Solves J dx = rhs in place by Gaussian elimination with partial pivoting.
/// Returns false when J is numerically singular.
inline bool solve_dense(std::vector<double> J, Vec& rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(J[r * n + col]) > std::abs(J[piv * n + col])) piv = r;
        if (std::abs(J[piv * n + col]) < 1e-14) return false;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(J[col * n + c], J[piv * n + c]);
            std::swap(rhs[col], rhs[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = J[r * n + col] / J[col * n + col];
            for (std::size_t c = col; c < n; ++c) J[r * n + c] -= f * J[col * n + c];
            rhs[r] -= f * rhs[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= J[i * n + c] * rhs[c];
        rhs[i] = s / J[i * n + i];
    }
    return true;
}

}  // namespace detail

/// Velocity v = f(x,p) solving d2L(x,v) = p: closed form p/m for natural
/// systems, damped Newton (50 iterations, tolerance 1e-12) otherwise.
inline Vec legendre_velocity(const LagrangianSystem& L, ConstVec x, ConstVec p) {
    if (L.natural) {
        Vec v(p.begin(), p.end());
        for (double& c : v) c /= L.natural->mass;
        return v;
    }
    const std::size_t d = L.dim;
    Vec v(p.begin(), p.end());
    auto residual = [&](const Vec& vv) {
        Vec g = L.grad_v(x, vv, 0.0);
        for (std::size_t i = 0; i < d; ++i) g[i] -= p[i];
        return g;
    };
    Vec g = residual(v);
    const double tol = 1e-12 * (1.0 + detail::max_abs(Vec(p.begin(), p.end())));
    for (int it = 0; it < 50; ++it) {
        const double gnorm = detail::max_abs(g);
        if (gnorm <= tol) return v;
        std::vector<double> J(d * d);
        for (std::size_t j = 0; j < d; ++j) {
            const double delta = 1e-6 * (1.0 + std::abs(v[j]));
            Vec vp = v, vm = v;
            vp[j] += delta;
            vm[j] -= delta;
            const Vec gp = L.grad_v(x, vp, 0.0);
            const Vec gm = L.grad_v(x, vm, 0.0);
            for (std::size_t i = 0; i < d; ++i) J[i * d + j] = (gp[i] - gm[i]) / (2.0 * delta);
        }
        Vec step = g;
        for (double& c : step) c = -c;
        if (!detail::solve_dense(J, step)) throw non_invertible_error("v -> dL/dv has a singular Jacobian");
        double lambda = 1.0;
        bool accepted = false;
        while (lambda >= 1e-4) {
            Vec trial = v;
            for (std::size_t i = 0; i < d; ++i) trial[i] += lambda * step[i];
            Vec gt = residual(trial);
            if (detail::max_abs(gt) < gnorm) {
                v = std::move(trial);
                g = std::move(gt);
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) break;
    }
    if (detail::max_abs(g) <= tol) return v;
    throw non_invertible_error("Newton inversion of v -> dL/dv did not converge");
}

/// H(x,p) = p.f(x,p) - L(x, f(x,p)) with d1 H = -d1 L(x,f), d2 H = f.
inline HamiltonianSystem legendre_transform(const LagrangianSystem& L) {
    HamiltonianSystem H;
    H.name = L.name;
    H.dim = L.dim;
    if (L.natural) {
        const NaturalForm form = *L.natural;
        H.hamiltonian = [form](ConstVec x, ConstVec p) { return dot(p, p) / (2.0 * form.mass) + form.potential(x); };
        H.grad_x = [form](ConstVec x, ConstVec) { return form.potential_gradient(x); };
        H.grad_p = [m = form.mass](ConstVec, ConstVec p) {
            Vec g(p.begin(), p.end());
            for (double& c : g) c /= m;
            return g;
        };
        H.natural = form;
        return H;
    }
    H.hamiltonian = [L](ConstVec x, ConstVec p) {
        const Vec v = legendre_velocity(L, x, p);
        return dot(p, v) - L.lagrangian(x, v, 0.0);
    };
    H.grad_x = [L](ConstVec x, ConstVec p) {
        Vec g = L.grad_x(x, legendre_velocity(L, x, p), 0.0);
        for (double& c : g) c = -c;
        return g;
    };
    H.grad_p = [L](ConstVec x, ConstVec p) { return legendre_velocity(L, x, p); };
    return H;
}

inline HamiltonianSystem harmonic_hamiltonian(double mass = 1.0, double omega = 1.0) {
    return legendre_transform(harmonic_lagrangian(mass, omega));
}
inline HamiltonianSystem free_particle_hamiltonian(double mass = 1.0) {
    return legendre_transform(free_particle_lagrangian(mass));
}
inline HamiltonianSystem quartic_hamiltonian(double lambda = 1.0) {
    return legendre_transform(quartic_lagrangian(lambda));
}

/// H(x,p) = -rate x.p. With p(0) = 0 the momentum stays 0 and the position
/// obeys the linear relaxation law D x = -rate x.
inline HamiltonianSystem relaxation_hamiltonian(double rate = 1.0) {
    HamiltonianSystem H;
    H.name = "relaxation";
    H.dim = 1;
    H.hamiltonian = [rate](ConstVec x, ConstVec p) { return -rate * dot(x, p); };
    H.grad_x = [rate](ConstVec, ConstVec p) { return Vec{-rate * p[0]}; };
    H.grad_p = [rate](ConstVec x, ConstVec) { return Vec{-rate * x[0]}; };
    return H;
}

/// D x at t = a for a solution of the canonical equations started at y0:
/// the right-hand side d2H(x0, p0).
inline Vec initial_rate(const HamiltonianSystem& H, ConstVec y0) {
    if (y0.size() != 2 * H.dim) throw mismatch_error("initial state must have dimension 2d");
    return H.grad_p(y0.subspan(0, H.dim), y0.subspan(H.dim, H.dim));
}

/// Embedded F_LH components stacked per node:
///   [p - d2L(x, Dx) | d1H(x,p) + d1L(x, Dx) | d2H(x,p) - Dx],  D = left Caputo.
inline ResidualReport flh_residual(const LagrangianSystem& L, const HamiltonianSystem& H, const Trajectory& x,
                                   const Trajectory& p, FracOrder order) {
    require_same_grid(x, p, "flh_residual");
    const std::size_t d = L.dim;
    if (x.dim() != d || p.dim() != d || H.dim != d) throw mismatch_error("flh_residual: dimension mismatch");
    const Trajectory dx = caputo_left(x, order);
    Trajectory r(x.grid(), 3 * d);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x.grid().node(i);
        const Vec l2 = L.grad_v(x.row(i), dx.row(i), t);
        const Vec l1 = L.grad_x(x.row(i), dx.row(i), t);
        const Vec h1 = H.grad_x(x.row(i), p.row(i));
        const Vec h2 = H.grad_p(x.row(i), p.row(i));
        for (std::size_t c = 0; c < d; ++c) {
            r(i, c) = p(i, c) - l2[c];
            r(i, d + c) = h1[c] + l1[c];
            r(i, 2 * d + c) = h2[c] - dx(i, c);
        }
    }
    return make_report(std::move(r), ResidualKind::flh);
}

namespace detail {

inline Vec canonical_rhs(const HamiltonianSystem& H, ConstVec y) {
    const std::size_t d = H.dim;
    const ConstVec x = y.subspan(0, d);
    const ConstVec p = y.subspan(d, d);
    const Vec hp = H.grad_p(x, p);
    const Vec hx = H.grad_x(x, p);
    Vec out(2 * d);
    for (std::size_t c = 0; c < d; ++c) {
        out[c] = hp[c];
        out[d + c] = -hx[c];
    }
    return out;
}

inline void require_state(const HamiltonianSystem& H, ConstVec y0) {
    if (y0.size() != 2 * H.dim) throw mismatch_error("initial state must have dimension 2d (x stacked over p)");
    for (double v : y0)
        if (!std::isfinite(v)) throw domain_error("initial state must be finite");
}

}  // namespace detail

/// Classical canonical equations dx/dt = d2H, dp/dt = -d1H. Velocity Verlet
/// for natural (separable) Hamiltonians, classical RK4 otherwise. The
/// returned trajectory has dimension 2d, x stacked over p.
inline Trajectory solve_classical(const HamiltonianSystem& H, ConstVec y0, const TimeGrid& grid) {
    detail::require_state(H, y0);
    const std::size_t d = H.dim;
    const double h = grid.step();
    Trajectory y(grid, 2 * d);
    std::copy(y0.begin(), y0.end(), y.row(0).begin());
    auto check = [&](std::size_t i) {
        for (double v : y.row(i))
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "classical solution became non-finite at t = " << grid.node(i);
                throw divergence_error(os.str());
            }
    };
    if (H.natural) {
        const double m = H.natural->mass;
        const auto& grad_u = H.natural->potential_gradient;
        Vec x(y0.begin(), y0.begin() + d), p(y0.begin() + d, y0.end());
        Vec force = grad_u(x);
        for (std::size_t i = 1; i < grid.size(); ++i) {
            for (std::size_t c = 0; c < d; ++c) p[c] -= 0.5 * h * force[c];
            for (std::size_t c = 0; c < d; ++c) x[c] += h * p[c] / m;
            force = grad_u(x);
            for (std::size_t c = 0; c < d; ++c) p[c] -= 0.5 * h * force[c];
            for (std::size_t c = 0; c < d; ++c) {
                y(i, c) = x[c];
                y(i, d + c) = p[c];
            }
            check(i);
        }
        return y;
    }
    Vec cur(y0.begin(), y0.end());
    Vec tmp(2 * d);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const Vec k1 = detail::canonical_rhs(H, cur);
        for (std::size_t c = 0; c < 2 * d; ++c) tmp[c] = cur[c] + 0.5 * h * k1[c];
        const Vec k2 = detail::canonical_rhs(H, tmp);
        for (std::size_t c = 0; c < 2 * d; ++c) tmp[c] = cur[c] + 0.5 * h * k2[c];
        const Vec k3 = detail::canonical_rhs(H, tmp);
        for (std::size_t c = 0; c < 2 * d; ++c) tmp[c] = cur[c] + h * k3[c];
        const Vec k4 = detail::canonical_rhs(H, tmp);
        for (std::size_t c = 0; c < 2 * d; ++c) cur[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        std::copy(cur.begin(), cur.end(), y.row(i).begin());
        check(i);
    }
    return y;
}

struct FdeSolution {
    Trajectory y;  // x stacked over p
    FracOrder alpha;
    Vec y0;

    [[nodiscard]] const TimeGrid& grid() const noexcept { return y.grid(); }
    [[nodiscard]] Trajectory x() const { return y.block(0, y.dim() / 2); }
    [[nodiscard]] Trajectory p() const { return y.block(y.dim() / 2, y.dim() / 2); }
};

inline constexpr double kDivergenceBound = 1e12;

/// Caputo canonical equations D x = d2H(x,p), D p = -d1H(x,p) on [a,b] by the
/// fractional Adams-Bashforth-Moulton scheme (one corrector sweep):
///   predictor  y_m^P = y0 + h^a/G(a+1) sum_j b_{m-j} f_j
///   corrector  y_m   = y0 + h^a/G(a+2) (f(y_m^P) + a_{0,m} f_0 + sum_{j>=1} a_{m-j} f_j)
inline FdeSolution solve_fde(const HamiltonianSystem& H, ConstVec y0, const TimeGrid& grid, FracOrder order) {
    detail::require_state(H, y0);
    if (order.is_classical()) throw domain_error("solve_fde needs alpha in (0,1); use solve_classical for alpha = 1");
    const double a = order.value();
    const std::size_t n = grid.steps();
    const std::size_t dd = 2 * H.dim;
    const double h = grid.step();

    std::vector<double> rect(n + 1, 0.0), trap(n + 1, 0.0);
    for (std::size_t l = 1; l <= n; ++l) {
        rect[l] = detail::forward_power_difference(l - 1, a);
        trap[l] = detail::second_power_difference(l, a + 1.0);
    }
    const double c_pred = std::pow(h, a) / std::tgamma(a + 1.0);
    const double c_corr = std::pow(h, a) / std::tgamma(a + 2.0);

    Trajectory y(grid, dd);
    std::vector<double> f((n + 1) * dd);
    std::copy(y0.begin(), y0.end(), y.row(0).begin());
    {
        const Vec f0 = detail::canonical_rhs(H, y0);
        std::copy(f0.begin(), f0.end(), f.begin());
    }
    Vec pred(dd), hist(dd);
    for (std::size_t m = 1; m <= n; ++m) {
        const long double dm = static_cast<long double>(m);
        const double first = static_cast<double>(
            std::pow(dm, static_cast<long double>(a)) *
            ((dm - 1.0L) * std::expm1(static_cast<long double>(a) * std::log1p(-1.0L / dm)) + a));
        for (std::size_t c = 0; c < dd; ++c) {
            double sp = 0.0;
            double sc = first * f[c];
            for (std::size_t j = 0; j < m; ++j) sp += rect[m - j] * f[j * dd + c];
            for (std::size_t j = 1; j < m; ++j) sc += trap[m - j] * f[j * dd + c];
            pred[c] = y0[c] + c_pred * sp;
            hist[c] = sc;
        }
        const Vec fp = detail::canonical_rhs(H, pred);
        for (std::size_t c = 0; c < dd; ++c) {
            const double v = y0[c] + c_corr * (hist[c] + fp[c]);
            if (!std::isfinite(v) || std::abs(v) > kDivergenceBound) {
                std::ostringstream os;
                os << "fractional solution diverged at t = " << grid.node(m);
                throw divergence_error(os.str());
            }
            y(m, c) = v;
        }
        const Vec fm = detail::canonical_rhs(H, y.row(m));
        std::copy(fm.begin(), fm.end(), f.begin() + static_cast<std::ptrdiff_t>(m * dd));
    }
    return FdeSolution{std::move(y), order, Vec(y0.begin(), y0.end())};
}

}  // namespace fracemb
