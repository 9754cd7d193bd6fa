#pragma once

// Internal time: heavy-tailed renewal counting processes, the totally skewed
// alpha-stable subordinator D(tau) and its inverse (hitting-time) process
//   S(t) = inf{ tau : D(tau) > t }.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "fracemb/error.hpp"
#include "fracemb/grid.hpp"
#include "fracemb/parallel.hpp"
#include "fracemb/random.hpp"
#include "fracemb/stats.hpp"

namespace fracemb {

/// Pareto waiting times, density alpha scale^alpha / t^{1+alpha} on t >= scale.
class WaitingTimeLaw {
public:
    WaitingTimeLaw(FracOrder alpha, double scale) : alpha_(alpha), scale_(scale) {
        if (alpha.is_classical()) throw domain_error("waiting-time tail exponent must lie in (0,1)");
        if (!(scale > 0.0)) throw domain_error("waiting-time scale must be positive");
    }

    [[nodiscard]] FracOrder alpha() const noexcept { return alpha_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }

    double sample(CounterRng& rng) const { return scale_ * std::pow(rng.uniform_open(), -1.0 / alpha_.value()); }

private:
    FracOrder alpha_;
    double scale_;
};

/// Standard positive alpha-stable variate W, E[exp(-lambda W)] = exp(-lambda^alpha),
/// by the Chambers-Mallows-Stuck construction.
inline double sample_positive_stable(double alpha, CounterRng& rng) {
    const double u = std::numbers::pi * (rng.uniform_open() - 0.5);
    const double e = rng.exponential();
    const double shifted = alpha * (u + 0.5 * std::numbers::pi);
    const double head = std::sin(shifted) / std::pow(std::cos(u), 1.0 / alpha);
    const double tail = std::pow(std::cos(u - shifted) / e, (1.0 - alpha) / alpha);
    return head * tail;
}

/// Subordinator increment over operational time dt: dt^{1/alpha} W > 0.
inline double sample_stable_subordinator_increment(FracOrder alpha, double dt, CounterRng& rng) {
    if (!(dt > 0.0)) throw domain_error("subordinator increment needs dt > 0");
    return std::pow(dt, 1.0 / alpha.value()) * sample_positive_stable(alpha.value(), rng);
}

struct SubordinatorPath {
    std::vector<double> tau;
    std::vector<double> d;
};

/// D on the grid tau_k = k tau_step, run until D first exceeds `level`.
inline SubordinatorPath simulate_subordinator(FracOrder alpha, double tau_step, double level, CounterRng& rng) {
    if (!(tau_step > 0.0)) throw domain_error("tau_step must be positive");
    SubordinatorPath path;
    path.tau.push_back(0.0);
    path.d.push_back(0.0);
    const double jump_scale = std::pow(tau_step, 1.0 / alpha.value());
    double d = 0.0;
    std::size_t k = 0;
    while (d <= level) {
        d += jump_scale * sample_positive_stable(alpha.value(), rng);
        ++k;
        path.tau.push_back(static_cast<double>(k) * tau_step);
        path.d.push_back(d);
    }
    return path;
}

/// Default operational step 1e-3 b^alpha: a thousandth of the typical S(b).
inline double default_tau_step(FracOrder alpha, const TimeGrid& grid) {
    return 1e-3 * std::pow(grid.b(), alpha.value());
}

/// One inverse-subordinator path on the nodes of `grid` (which must start at 0).
/// S(t_i) is read off the discretized D as the last tau_k with D(tau_k) <= t_i,
/// so S(0) = 0 exactly and the O(tau_step) inversion bias is one-sided.
inline void inverse_path_on_grid(FracOrder alpha, const TimeGrid& grid, double tau_step, CounterRng& rng,
                                 std::span<double> out) {
    const std::size_t nodes = grid.size();
    const double jump_scale = std::pow(tau_step, 1.0 / alpha.value());
    double d = 0.0;
    std::size_t k = 0;
    std::size_t i = 0;
    while (i < nodes) {
        const double next = d + jump_scale * sample_positive_stable(alpha.value(), rng);
        while (i < nodes && next > grid.node(i)) {
            out[i] = static_cast<double>(k) * tau_step;
            ++i;
        }
        d = next;
        ++k;
    }
}

/// M inverse-subordinator paths sampled on a grid, stored path-major.
struct SubordinatorEnsemble {
    TimeGrid grid;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
    double tau_step = 0.0;
    std::vector<double> values;

    [[nodiscard]] std::span<const double> path(std::size_t k) const {
        return {values.data() + k * grid.size(), grid.size()};
    }
    [[nodiscard]] double at(std::size_t k, std::size_t i) const { return values[k * grid.size() + i]; }
};

inline void require_origin_grid(const TimeGrid& grid) {
    if (grid.a() != 0.0) {
        std::ostringstream os;
        os << "internal-time grids must start at t = 0, got a = " << grid.a();
        throw grid_error(os.str());
    }
}

/// Path k uses substream (seed, subordinator, k); the result depends only on
/// (alpha, grid, M, tau_step, seed), never on `workers`.
inline SubordinatorEnsemble inverse_subordinator_paths(FracOrder alpha, const TimeGrid& grid, std::size_t paths,
                                                       double tau_step, std::uint64_t seed, unsigned workers = 1) {
    require_origin_grid(grid);
    if (alpha.is_classical()) throw domain_error("inverse subordinator needs alpha in (0,1)");
    if (!(tau_step > 0.0)) throw domain_error("tau_step must be positive");
    if (paths < 1) throw domain_error("ensemble needs at least one path");
    SubordinatorEnsemble e{grid, paths, seed, tau_step, std::vector<double>(paths * grid.size())};
    parallel_for(paths, workers, [&](std::size_t k) {
        CounterRng rng(seed, streams::subordinator, k);
        inverse_path_on_grid(alpha, grid, tau_step, rng, std::span<double>(e.values.data() + k * grid.size(), grid.size()));
    });
    return e;
}

/// Applies f to every sampled value, e.g. S -> exp(-v S).
template <typename F>
SubordinatorEnsemble map_values(const SubordinatorEnsemble& e, F&& f) {
    SubordinatorEnsemble out = e;
    for (double& v : out.values) v = f(v);
    return out;
}

struct EnsembleStats {
    TimeGrid grid;
    std::vector<double> mean;
    std::vector<double> stderr;
};

/// Pointwise sample mean and standard error (sample std / sqrt(M)), paths
/// reduced in index order.
inline EnsembleStats ensemble_mean(const SubordinatorEnsemble& e) {
    if (e.paths < 2) throw degenerate_sample_error("ensemble_mean needs M >= 2 paths");
    const std::size_t nodes = e.grid.size();
    std::vector<RunningStats> acc(nodes);
    for (std::size_t k = 0; k < e.paths; ++k)
        for (std::size_t i = 0; i < nodes; ++i) acc[i].add(e.at(k, i));
    EnsembleStats s{e.grid, std::vector<double>(nodes), std::vector<double>(nodes)};
    for (std::size_t i = 0; i < nodes; ++i) {
        s.mean[i] = acc[i].mean;
        s.stderr[i] = acc[i].stderr_of_mean();
    }
    return s;
}

/// Mean and standard error of f(S(t_i)) over M paths without storing the
/// paths. Paths are split into at most 32 contiguous batches that are reduced
/// independently and merged in order, so the result does not depend on
/// `workers`. Path k uses the same substream as inverse_subordinator_paths.
template <typename F>
EnsembleStats internal_time_expectation(FracOrder alpha, const TimeGrid& grid, std::size_t paths, double tau_step,
                                        std::uint64_t seed, F&& f, unsigned workers = 1) {
    require_origin_grid(grid);
    if (alpha.is_classical()) throw domain_error("inverse subordinator needs alpha in (0,1)");
    if (!(tau_step > 0.0)) throw domain_error("tau_step must be positive");
    if (paths < 2) throw degenerate_sample_error("expectations need M >= 2 paths");
    const std::size_t nodes = grid.size();
    const std::size_t batches = std::min<std::size_t>(32, paths);
    std::vector<std::vector<RunningStats>> acc(batches, std::vector<RunningStats>(nodes));
    parallel_for(batches, workers, [&](std::size_t b) {
        std::vector<double> s(nodes);
        for (std::size_t k = b * paths / batches; k < (b + 1) * paths / batches; ++k) {
            CounterRng rng(seed, streams::subordinator, k);
            inverse_path_on_grid(alpha, grid, tau_step, rng, s);
            for (std::size_t i = 0; i < nodes; ++i) acc[b][i].add(f(s[i]));
        }
    });
    EnsembleStats st{grid, std::vector<double>(nodes), std::vector<double>(nodes)};
    for (std::size_t i = 0; i < nodes; ++i) {
        RunningStats total;
        for (std::size_t b = 0; b < batches; ++b) total.merge(acc[b][i]);
        st.mean[i] = total.mean;
        st.stderr[i] = total.stderr_of_mean();
    }
    return st;
}

/// Sample path of the counting process N_t = max{n : T(n) <= t} on [0, horizon].
struct CountingPath {
    double horizon = 0.0;
    std::vector<double> jump_times;  // T(1) < T(2) < ... <= horizon

    [[nodiscard]] std::size_t count_at(double t) const {
        return static_cast<std::size_t>(std::upper_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin());
    }
};

inline CountingPath renewal_counting_process(const WaitingTimeLaw& law, double horizon, CounterRng& rng) {
    if (!(horizon > 0.0)) throw domain_error("counting-process horizon must be positive");
    CountingPath path{horizon, {}};
    double t = law.sample(rng);
    while (t <= horizon) {
        path.jump_times.push_back(t);
        t += law.sample(rng);
    }
    return path;
}

inline CountingPath renewal_counting_process(const WaitingTimeLaw& law, double horizon, std::uint64_t seed,
                                             std::uint64_t index = 0) {
    CounterRng rng(seed, streams::renewal, index);
    return renewal_counting_process(law, horizon, rng);
}

/// N_horizon alone, without storing the jump times.
inline std::size_t count_at_horizon(const WaitingTimeLaw& law, double horizon, CounterRng& rng) {
    std::size_t n = 0;
    double t = law.sample(rng);
    while (t <= horizon) {
        ++n;
        t += law.sample(rng);
    }
    return n;
}

struct ScalingLimitResult {
    double ks = 0.0;
    double normalization = 0.0;  // calibrated b(c)
    double median_count = 0.0;
    double median_internal_time = 0.0;
    std::vector<double> rescaled_counts;
    std::vector<double> internal_times;
};

/// Compares N_c / b(c) with S(1). b(c) is calibrated as
/// median(N_c) / median(S(1)); the KS statistic therefore tests the shape of
/// the limit law, not its unstated constant.
inline ScalingLimitResult scaling_limit_check(const WaitingTimeLaw& law, double c, std::size_t samples,
                                              std::uint64_t seed, unsigned workers = 1) {
    if (!(c >= 100.0)) throw domain_error("scaling_limit_check needs c >= 100");
    if (samples < 1000) throw domain_error("scaling_limit_check needs at least 1000 samples");

    std::vector<double> counts(samples);
    parallel_for(samples, workers, [&](std::size_t k) {
        CounterRng rng(seed, streams::renewal, k);
        counts[k] = static_cast<double>(count_at_horizon(law, c, rng));
    });
    if (std::all_of(counts.begin(), counts.end(), [](double v) { return v == 0.0; }))
        throw degenerate_sample_error("all sampled N_c are zero; increase c");

    const TimeGrid unit(0.0, 1.0, 2);
    const auto ens = inverse_subordinator_paths(law.alpha(), unit, samples, default_tau_step(law.alpha(), unit),
                                                seed ^ 0x5CA1AB1EULL, workers);
    std::vector<double> s1(samples);
    for (std::size_t k = 0; k < samples; ++k) s1[k] = ens.at(k, unit.steps());

    ScalingLimitResult r;
    r.median_count = median(counts);
    r.median_internal_time = median(s1);
    if (!(r.median_count > 0.0)) throw degenerate_sample_error("median of N_c is zero; increase c");
    r.normalization = r.median_count / r.median_internal_time;
    r.rescaled_counts = counts;
    for (double& v : r.rescaled_counts) v /= r.normalization;
    r.internal_times = std::move(s1);
    r.ks = ks_statistic(r.rescaled_counts, r.internal_times);
    return r;
}

}  // namespace fracemb
