#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "fracemb/error.hpp"

namespace fracemb {

/// Fractional order alpha. Valid orders lie in (0,1); alpha = 1 is only
/// reachable through classical_limit() and turns every operator into its
/// first-order (backward / forward difference) counterpart.
class FracOrder {
public:
    explicit FracOrder(double alpha) : alpha_(alpha) {
        if (!(alpha > 0.0 && alpha < 1.0)) {
            std::ostringstream os;
            os << "alpha must lie in (0,1), got " << alpha;
            throw domain_error(os.str());
        }
    }

    [[nodiscard]] static FracOrder classical_limit() { return FracOrder(Classical{}); }

    [[nodiscard]] double value() const noexcept { return alpha_; }
    [[nodiscard]] bool is_classical() const noexcept { return alpha_ == 1.0; }

private:
    struct Classical {};
    explicit FracOrder(Classical) : alpha_(1.0) {}
    double alpha_;
};

/// Uniform grid t_i = a + i h, i = 0..n.
class TimeGrid {
public:
    TimeGrid(double a, double b, std::size_t n) : a_(a), b_(b), n_(n) {
        if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
            std::ostringstream os;
            os << "time grid needs a < b, got [" << a << ", " << b << "]";
            throw grid_error(os.str());
        }
        if (n < 2) throw grid_error("time grid needs at least n = 2 steps");
    }

    [[nodiscard]] double a() const noexcept { return a_; }
    [[nodiscard]] double b() const noexcept { return b_; }
    [[nodiscard]] std::size_t steps() const noexcept { return n_; }
    [[nodiscard]] std::size_t size() const noexcept { return n_ + 1; }
    [[nodiscard]] double step() const noexcept { return (b_ - a_) / static_cast<double>(n_); }
    [[nodiscard]] double node(std::size_t i) const noexcept {
        // pin the last node to b exactly
        return i == n_ ? b_ : a_ + static_cast<double>(i) * step();
    }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double a_;
    double b_;
    std::size_t n_;
};

/// Vector-valued samples on a TimeGrid, stored node-major.
class Trajectory {
public:
    Trajectory(TimeGrid grid, std::size_t dim) : grid_(grid), dim_(dim), values_(grid.size() * dim, 0.0) {
        if (dim == 0) throw mismatch_error("trajectory dimension must be positive");
    }

    Trajectory(TimeGrid grid, std::size_t dim, std::vector<double> values)
        : grid_(grid), dim_(dim), values_(std::move(values)) {
        if (dim == 0) throw mismatch_error("trajectory dimension must be positive");
        if (values_.size() != grid_.size() * dim_) throw mismatch_error("trajectory value count does not match grid");
    }

    /// Samples f(t) on every node of a scalar trajectory.
    template <typename F>
    [[nodiscard]] static Trajectory sample(TimeGrid grid, F&& f) {
        Trajectory out(grid, 1);
        for (std::size_t i = 0; i < grid.size(); ++i) out(i, 0) = f(grid.node(i));
        return out;
    }

    [[nodiscard]] const TimeGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return grid_.size(); }

    double& operator()(std::size_t i, std::size_t c) { return values_[i * dim_ + c]; }
    double operator()(std::size_t i, std::size_t c) const { return values_[i * dim_ + c]; }

    [[nodiscard]] std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }

    [[nodiscard]] std::vector<double> component(std::size_t c) const {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < size(); ++i) out[i] = (*this)(i, c);
        return out;
    }

    void set_component(std::size_t c, std::span<const double> v) {
        if (v.size() != size()) throw mismatch_error("component length does not match grid");
        for (std::size_t i = 0; i < size(); ++i) (*this)(i, c) = v[i];
    }

    /// Components [first, first + count) as a new trajectory.
    [[nodiscard]] Trajectory block(std::size_t first, std::size_t count) const {
        if (first + count > dim_ || count == 0) throw mismatch_error("trajectory block out of range");
        Trajectory out(grid_, count);
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t c = 0; c < count; ++c) out(i, c) = (*this)(i, first + c);
        return out;
    }

    [[nodiscard]] bool all_finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::vector<double>& values() noexcept { return values_; }

private:
    TimeGrid grid_;
    std::size_t dim_;
    std::vector<double> values_;
};

/// Stacks two trajectories on the same grid: [top, bottom].
inline Trajectory stack(const Trajectory& top, const Trajectory& bottom) {
    if (!(top.grid() == bottom.grid())) throw mismatch_error("cannot stack trajectories on different grids");
    Trajectory out(top.grid(), top.dim() + bottom.dim());
    for (std::size_t i = 0; i < top.size(); ++i) {
        for (std::size_t c = 0; c < top.dim(); ++c) out(i, c) = top(i, c);
        for (std::size_t c = 0; c < bottom.dim(); ++c) out(i, top.dim() + c) = bottom(i, c);
    }
    return out;
}

inline void require_same_grid(const Trajectory& x, const Trajectory& y, const char* what) {
    if (!(x.grid() == y.grid())) {
        std::ostringstream os;
        os << what << ": trajectories live on different grids";
        throw mismatch_error(os.str());
    }
}

}  // namespace fracemb
