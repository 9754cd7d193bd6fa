#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string_view>

#include "fracemb/grid.hpp"

namespace fracemb {

enum class ResidualKind { general_el, causal_el, canonical, flh };

inline std::string_view to_string(ResidualKind k) {
    switch (k) {
        case ResidualKind::general_el: return "general_EL";
        case ResidualKind::causal_el: return "causal_EL";
        case ResidualKind::canonical: return "canonical";
        case ResidualKind::flh: return "FLH";
    }
    return "unknown";
}

/// Nodes excluded at each end when taking residual norms: ceil(n/64).
/// One-sided fractional operators lose accuracy in these endpoint layers.
inline std::size_t interior_window(const TimeGrid& grid) { return (grid.steps() + 63) / 64; }

/// Per-node equation residual with interior-node norms.
struct ResidualReport {
    Trajectory residual;
    ResidualKind kind;
    std::size_t window = 0;  // nodes skipped at each end for the norms
    double max_norm = 0.0;
    double l2_norm = 0.0;

    [[nodiscard]] const TimeGrid& grid() const noexcept { return residual.grid(); }

    /// Interior max norm of components [first, first + count).
    [[nodiscard]] double block_max_norm(std::size_t first, std::size_t count) const {
        double m = 0.0;
        for (std::size_t i = window; i + window < residual.size(); ++i)
            for (std::size_t c = first; c < first + count; ++c) m = std::max(m, std::abs(residual(i, c)));
        return m;
    }
};

inline ResidualReport make_report(Trajectory residual, ResidualKind kind) {
    ResidualReport r{std::move(residual), kind, 0, 0.0, 0.0};
    r.window = interior_window(r.residual.grid());
    const double h = r.residual.grid().step();
    double sq = 0.0;
    for (std::size_t i = r.window; i + r.window < r.residual.size(); ++i) {
        for (std::size_t c = 0; c < r.residual.dim(); ++c) {
            const double v = r.residual(i, c);
            r.max_norm = std::max(r.max_norm, std::abs(v));
            sq += v * v;
        }
    }
    r.l2_norm = std::sqrt(sq * h);
    return r;
}

}  // namespace fracemb
