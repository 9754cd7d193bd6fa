#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "fracemb/error.hpp"

namespace fracemb {

/// Welford accumulator with ordered merging (Chan et al.).
struct RunningStats {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        ++count;
        const double delta = x - mean;
        mean += delta / static_cast<double>(count);
        m2 += delta * (x - mean);
    }

    void merge(const RunningStats& o) noexcept {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double n1 = static_cast<double>(count);
        const double n2 = static_cast<double>(o.count);
        const double delta = o.mean - mean;
        const double n = n1 + n2;
        mean += delta * n2 / n;
        m2 += o.m2 + delta * delta * n1 * n2 / n;
        count += o.count;
    }

    /// Sample variance (n - 1 denominator); 0 for fewer than two samples.
    [[nodiscard]] double variance() const noexcept {
        return count < 2 ? 0.0 : m2 / static_cast<double>(count - 1);
    }
    [[nodiscard]] double stderr_of_mean() const noexcept {
        return count < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(count));
    }
};

/// Empirical quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> sample, double q) {
    if (sample.empty()) throw degenerate_sample_error("quantile of an empty sample");
    std::sort(sample.begin(), sample.end());
    const double pos = q * static_cast<double>(sample.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sample.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sample[lo] + frac * (sample[hi] - sample[lo]);
}

inline double median(std::vector<double> sample) { return quantile(std::move(sample), 0.5); }

/// Two-sample Kolmogorov-Smirnov statistic sup |F1 - F2|, ties handled by
/// stepping over equal values in both samples together.
inline double ks_statistic(std::vector<double> x, std::vector<double> y) {
    if (x.empty() || y.empty()) throw degenerate_sample_error("KS statistic needs two non-empty samples");
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return d;
}

}  // namespace fracemb
