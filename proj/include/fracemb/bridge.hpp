#pragma once

// Subordination of classical Hamiltonian flows by the internal time S(t):
//   x_a(t) = E[x(S(t))],  p_a(t) = E[p(S(t))]
// and the numerical checks tying the Monte Carlo means to the fractional
// canonical equations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <vector>

#include "fracemb/dynamics.hpp"
#include "fracemb/error.hpp"
#include "fracemb/fracops.hpp"
#include "fracemb/grid.hpp"
#include "fracemb/parallel.hpp"
#include "fracemb/random.hpp"
#include "fracemb/residual.hpp"
#include "fracemb/stats.hpp"
#include "fracemb/stochastic_time.hpp"
#include "fracemb/systems.hpp"
#include "fracemb/variational.hpp"

namespace fracemb {

struct SubordinationOptions {
    unsigned workers = 1;
    double tau_step = 0.0;           // 0: default_tau_step
    std::size_t batches = 32;        // fixed path partition for reductions and batch means
    std::size_t pilot_paths = 2000;  // paths used to size the classical horizon
    double classical_step = 1e-3;    // step of the classical solve that is interpolated
};

struct SubordinatedObservable {
    TimeGrid grid;
    FracOrder alpha;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
    Trajectory mean;         // [x_a | p_a]
    Trajectory stderr;       // per-path standard error of `mean`
    Trajectory grad_mean;    // [E d1H(x(S),p(S)) | E d2H(x(S),p(S))]
    Trajectory grad_stderr;
    std::vector<Trajectory> batch_means;  // [x | p] averaged over each batch
    std::vector<std::size_t> batch_sizes;
    double horizon = 0.0;  // classical flow solved on [0, horizon]
    bool horizon_extended = false;

    [[nodiscard]] std::size_t dim() const noexcept { return mean.dim() / 2; }
    [[nodiscard]] Trajectory x_alpha() const { return mean.block(0, dim()); }
    [[nodiscard]] Trajectory p_alpha() const { return mean.block(dim(), dim()); }
};

namespace detail {

/// Linear interpolation of a trajectory on a uniform grid at time tau.
inline void interpolate(const Trajectory& y, double tau, std::span<double> out) {
    const TimeGrid& g = y.grid();
    const double pos = (tau - g.a()) / g.step();
    auto i = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
    if (i >= g.steps()) i = g.steps() - 1;
    const double frac = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
    for (std::size_t c = 0; c < y.dim(); ++c) out[c] = y(i, c) + frac * (y(i + 1, c) - y(i, c));
}

inline std::vector<std::size_t> batch_bounds(std::size_t paths, std::size_t batches) {
    const std::size_t b = std::max<std::size_t>(1, std::min(batches, paths));
    std::vector<std::size_t> bounds(b + 1);
    for (std::size_t k = 0; k <= b; ++k) bounds[k] = k * paths / b;
    return bounds;
}

/// Weighted batch-means standard error of a quantity whose per-batch values
/// are q[b] (batch sizes n[b]).
inline double batch_stderr(const std::vector<double>& q, const std::vector<std::size_t>& n) {
    const std::size_t B = q.size();
    if (B < 2) return 0.0;
    double total = 0.0, mean = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        total += static_cast<double>(n[b]);
        mean += static_cast<double>(n[b]) * q[b];
    }
    mean /= total;
    double s2 = 0.0;
    for (std::size_t b = 0; b < B; ++b) s2 += static_cast<double>(n[b]) * (q[b] - mean) * (q[b] - mean);
    s2 /= static_cast<double>(B - 1);
    return std::sqrt(s2 / total);
}

}  // namespace detail

/// Monte Carlo subordination of the classical flow of H started at y0.
///
/// The classical solution is computed once on [0, T] with T the 99.9th
/// percentile of S(b) over a pilot ensemble; if any path exceeds T it is
/// doubled once and the run repeated, after which a coverage_error is raised.
inline SubordinatedObservable subordinate_flow(const HamiltonianSystem& H, ConstVec y0, const TimeGrid& grid,
                                               FracOrder order, std::size_t paths, std::uint64_t seed,
                                               const SubordinationOptions& opts = {}) {
    require_origin_grid(grid);
    if (order.is_classical()) throw domain_error("subordination needs alpha in (0,1)");
    if (paths < 1) throw domain_error("subordination needs at least one path");
    if (y0.size() != 2 * H.dim) throw mismatch_error("initial state must have dimension 2d");
    const std::size_t d = H.dim;
    const std::size_t dd = 2 * d;
    const std::size_t nodes = grid.size();
    const double tau_step = opts.tau_step > 0.0 ? opts.tau_step : default_tau_step(order, grid);

    const std::size_t pilot = std::min(paths, opts.pilot_paths);
    std::vector<double> pilot_end(pilot);
    {
        const TimeGrid end_grid(0.0, grid.b(), 2);
        parallel_for(pilot, opts.workers, [&](std::size_t k) {
            CounterRng rng(seed, streams::pilot, k);
            double s[3];
            inverse_path_on_grid(order, end_grid, tau_step, rng, s);
            pilot_end[k] = s[2];
        });
    }
    double horizon = std::max(quantile(pilot_end, 0.999), 16.0 * tau_step);

    const auto bounds = detail::batch_bounds(paths, opts.batches);
    const std::size_t nbatch = bounds.size() - 1;
    // per batch, per node: [x | p | d1H | d2H]
    std::vector<std::vector<RunningStats>> acc(nbatch);

    bool extended = false;
    for (int attempt = 0;; ++attempt) {
        const auto steps = static_cast<std::size_t>(std::max(1024.0, std::ceil(horizon / opts.classical_step)));
        const Trajectory flow = solve_classical(H, y0, TimeGrid(0.0, horizon, steps));
        std::vector<char> exceeded(nbatch, 0);
        parallel_for(nbatch, opts.workers, [&](std::size_t b) {
            auto& stats = acc[b];
            stats.assign(nodes * 2 * dd, RunningStats{});
            std::vector<double> s(nodes);
            std::vector<double> y(dd);
            for (std::size_t k = bounds[b]; k < bounds[b + 1]; ++k) {
                CounterRng rng(seed, streams::subordinator, k);
                inverse_path_on_grid(order, grid, tau_step, rng, s);
                if (s.back() > horizon) {
                    exceeded[b] = 1;
                    return;
                }
                for (std::size_t i = 0; i < nodes; ++i) {
                    detail::interpolate(flow, s[i], y);
                    const ConstVec x(y.data(), d), p(y.data() + d, d);
                    const Vec g1 = H.grad_x(x, p);
                    const Vec g2 = H.grad_p(x, p);
                    RunningStats* row = &stats[i * 2 * dd];
                    for (std::size_t c = 0; c < dd; ++c) row[c].add(y[c]);
                    for (std::size_t c = 0; c < d; ++c) {
                        row[dd + c].add(g1[c]);
                        row[dd + d + c].add(g2[c]);
                    }
                }
            }
        });
        if (std::none_of(exceeded.begin(), exceeded.end(), [](char e) { return e != 0; })) break;
        if (attempt >= 1) {
            std::ostringstream os;
            os << "a sampled internal time exceeded the classical horizon " << horizon << " after extension";
            throw coverage_error(os.str());
        }
        horizon *= 2.0;
        extended = true;
    }

    SubordinatedObservable obs{grid,
                               order,
                               paths,
                               seed,
                               Trajectory(grid, dd),
                               Trajectory(grid, dd),
                               Trajectory(grid, dd),
                               Trajectory(grid, dd),
                               {},
                               {},
                               horizon,
                               extended};
    for (std::size_t b = 0; b < nbatch; ++b) {
        Trajectory bm(grid, dd);
        for (std::size_t i = 0; i < nodes; ++i)
            for (std::size_t c = 0; c < dd; ++c) bm(i, c) = acc[b][i * 2 * dd + c].mean;
        obs.batch_means.push_back(std::move(bm));
        obs.batch_sizes.push_back(bounds[b + 1] - bounds[b]);
    }
    for (std::size_t i = 0; i < nodes; ++i) {
        for (std::size_t c = 0; c < 2 * dd; ++c) {
            RunningStats total;
            for (std::size_t b = 0; b < nbatch; ++b) total.merge(acc[b][i * 2 * dd + c]);
            if (c < dd) {
                obs.mean(i, c) = total.mean;
                obs.stderr(i, c) = total.stderr_of_mean();
            } else {
                obs.grad_mean(i, c - dd) = total.mean;
                obs.grad_stderr(i, c - dd) = total.stderr_of_mean();
            }
        }
    }
    return obs;
}

/// Gap between the gradients of H at the means and the means of the
/// gradients along paths, [d1H | d2H] per node.
struct CommutationReport {
    Trajectory gap;
    Trajectory stderr;        // standard error of the path mean of the gradient
    double max_gap = 0.0;
    double max_significance = 0.0;  // max gap / stderr over nodes with stderr > 0
};

inline CommutationReport commutation_gap(const HamiltonianSystem& H, const SubordinatedObservable& obs) {
    const std::size_t d = H.dim;
    if (obs.dim() != d) throw mismatch_error("commutation_gap: dimension mismatch");
    CommutationReport r{Trajectory(obs.grid, 2 * d), obs.grad_stderr, 0.0, 0.0};
    for (std::size_t i = 0; i < obs.grid.size(); ++i) {
        const ConstVec x = obs.mean.row(i).subspan(0, d);
        const ConstVec p = obs.mean.row(i).subspan(d, d);
        const Vec g1 = H.grad_x(x, p);
        const Vec g2 = H.grad_p(x, p);
        for (std::size_t c = 0; c < d; ++c) {
            r.gap(i, c) = std::abs(g1[c] - obs.grad_mean(i, c));
            r.gap(i, d + c) = std::abs(g2[c] - obs.grad_mean(i, d + c));
        }
        for (std::size_t c = 0; c < 2 * d; ++c) {
            r.max_gap = std::max(r.max_gap, r.gap(i, c));
            if (r.stderr(i, c) > 0.0) r.max_significance = std::max(r.max_significance, r.gap(i, c) / r.stderr(i, c));
        }
    }
    return r;
}

inline constexpr double kSchemeTolerance = 5e-3;

struct StanislavskyReport {
    SubordinatedObservable observable;
    FdeSolution fde;
    Trajectory deviation;              // |MC mean - FDE| per node and component
    double fraction_within_stderr = 0.0;  // interior nodes with deviation <= 3 stderr
    double fraction_within_budget = 0.0;  // interior nodes with deviation <= 3 stderr + tol
    double tolerance = kSchemeTolerance;
    std::size_t window = 0;
    [[nodiscard]] bool passed() const { return fraction_within_budget >= 0.95; }
};

/// Compares the subordinated means with the fractional ABM solution of the
/// Caputo canonical equations. Only meaningful when the gradients of H are
/// affine, so it refuses other Hamiltonians.
inline StanislavskyReport verify_stanislavsky(const HamiltonianSystem& H, ConstVec y0, const TimeGrid& grid,
                                              FracOrder order, std::size_t paths, std::uint64_t seed,
                                              const SubordinationOptions& opts = {},
                                              double tolerance = kSchemeTolerance) {
    if (!has_affine_gradients(H))
        throw domain_error("verify_stanislavsky requires a Hamiltonian with affine gradients");
    auto obs = subordinate_flow(H, y0, grid, order, paths, seed, opts);
    auto fde = solve_fde(H, y0, grid, order);
    const std::size_t dd = 2 * H.dim;
    Trajectory dev(grid, dd);
    const std::size_t w = interior_window(grid);
    std::size_t within_se = 0, within_budget = 0, counted = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        bool ok_se = true, ok_budget = true;
        for (std::size_t c = 0; c < dd; ++c) {
            dev(i, c) = std::abs(obs.mean(i, c) - fde.y(i, c));
            ok_se = ok_se && dev(i, c) <= 3.0 * obs.stderr(i, c);
            ok_budget = ok_budget && dev(i, c) <= 3.0 * obs.stderr(i, c) + tolerance;
        }
        if (i >= w && i + w < grid.size()) {
            ++counted;
            within_se += ok_se;
            within_budget += ok_budget;
        }
    }
    StanislavskyReport r{std::move(obs), std::move(fde), std::move(dev), 0.0, 0.0, tolerance, w};
    r.fraction_within_stderr = static_cast<double>(within_se) / static_cast<double>(counted);
    r.fraction_within_budget = static_cast<double>(within_budget) / static_cast<double>(counted);
    return r;
}

/// A per-node comparison with batch-means standard errors.
struct BudgetCheck {
    Trajectory value;   // signed quantity that should vanish
    Trajectory stderr;  // batch-means standard error of `value`
    double max_abs = 0.0;
    double worst_excess = 0.0;      // max over interior nodes of |value| - (3 stderr + tol)
    double fraction_within = 0.0;   // interior nodes with every component inside the budget
    bool passed = false;            // fraction_within >= 0.95
};

struct CompatibilityReport {
    SubordinatedObservable observable;
    BudgetCheck momentum;  // p_a - m D x_a
    BudgetCheck causal;    // causal Euler-Lagrange residual of x_a
    CommutationReport commutation;
    double tolerance = kSchemeTolerance;
    [[nodiscard]] bool passed() const { return momentum.passed && causal.passed; }
};

namespace detail {

/// Applies `quantity` (batch mean trajectory [x|p] -> trajectory) to the
/// overall mean and to every batch mean, and judges |value| <= 3 stderr + tol
/// on interior nodes.
template <typename Quantity>
BudgetCheck budget_check(const SubordinatedObservable& obs, Quantity&& quantity, double tolerance) {
    const Trajectory value = quantity(obs.mean);
    std::vector<Trajectory> per_batch;
    per_batch.reserve(obs.batch_means.size());
    for (const auto& bm : obs.batch_means) per_batch.push_back(quantity(bm));
    BudgetCheck chk{value, Trajectory(value.grid(), value.dim()), 0.0, -1e300, 0.0, false};
    const std::size_t w = interior_window(value.grid());
    std::vector<double> q(per_batch.size());
    std::size_t within = 0, counted = 0;
    for (std::size_t i = 0; i < value.size(); ++i) {
        const bool interior = i >= w && i + w < value.size();
        bool ok = true;
        for (std::size_t c = 0; c < value.dim(); ++c) {
            for (std::size_t b = 0; b < per_batch.size(); ++b) q[b] = per_batch[b](i, c);
            chk.stderr(i, c) = batch_stderr(q, obs.batch_sizes);
            const double v = std::abs(value(i, c));
            const double excess = v - (3.0 * chk.stderr(i, c) + tolerance);
            ok = ok && excess <= 0.0;
            if (interior) {
                chk.max_abs = std::max(chk.max_abs, v);
                chk.worst_excess = std::max(chk.worst_excess, excess);
            }
        }
        if (interior) {
            ++counted;
            within += ok;
        }
    }
    chk.fraction_within = static_cast<double>(within) / static_cast<double>(counted);
    chk.passed = chk.fraction_within >= 0.95;
    return chk;
}

}  // namespace detail

/// For a natural Lagrangian: checks p_a = m D x_a and the causal
/// Euler-Lagrange equation for x_a, each within 3 stderr + tol on at least
/// 95% of interior nodes, and reports the commutation gap. Both derived
/// quantities are linear in the path mean, so their standard errors come
/// from batch means.
inline CompatibilityReport verify_compatibility(const LagrangianSystem& L, ConstVec y0, const TimeGrid& grid,
                                                FracOrder order, std::size_t paths, std::uint64_t seed,
                                                const SubordinationOptions& opts = {},
                                                double tolerance = kSchemeTolerance) {
    if (!L.natural) throw domain_error("verify_compatibility requires a natural Lagrangian");
    const HamiltonianSystem H = legendre_transform(L);
    const std::size_t d = L.dim;
    const double m = L.natural->mass;
    auto obs = subordinate_flow(H, y0, grid, order, paths, seed, opts);

    const Vec rate = initial_rate(H, y0);
    auto momentum_gap = [&](const Trajectory& xp) {
        const Trajectory dx = caputo_left(xp.block(0, d), order);
        Trajectory out(grid, d);
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t c = 0; c < d; ++c) out(i, c) = xp(i, d + c) - m * dx(i, c);
        return out;
    };
    auto causal = [&](const Trajectory& xp) { return causal_el_residual(L, xp.block(0, d), order, rate).residual; };

    CompatibilityReport r{obs, detail::budget_check(obs, momentum_gap, tolerance),
                          detail::budget_check(obs, causal, tolerance), commutation_gap(H, obs), tolerance};
    return r;
}

}  // namespace fracemb
