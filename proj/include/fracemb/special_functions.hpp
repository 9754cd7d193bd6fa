#pragma once

// Gamma-function helpers and the real two-parameter Mittag-Leffler function
// E_{a,b}(z) = sum_k z^k / Gamma(a k + b).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fracemb/error.hpp"

namespace fracemb {

struct MLParams {
    double alpha = 1.0;
    double beta = 1.0;
};

namespace detail {

inline bool is_nonpositive_integer(double x) {
    return x <= 0.0 && std::floor(x) == x;
}

/// Sign of Gamma(x) for x off the poles.
inline double gamma_sign(double x) {
    if (x > 0.0) return 1.0;
    return (static_cast<long long>(std::floor(x)) % 2 == 0) ? 1.0 : -1.0;
}

/// 1/Gamma(x), entire; zero on the poles.
inline double reciprocal_gamma(double x) {
    if (is_nonpositive_integer(x)) return 0.0;
    if (x > 0.0 && x < 170.0) return 1.0 / std::tgamma(x);
    return gamma_sign(x) * std::exp(-std::lgamma(x));
}

/// Neumaier-compensated accumulator.
template <typename Real>
struct CompensatedSum {
    Real sum = 0;
    Real carry = 0;

    void add(Real v) {
        const Real t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            carry += (sum - t) + v;
        else
            carry += (v - t) + sum;
        sum = t;
    }
    [[nodiscard]] Real value() const { return sum + carry; }
};

struct SeriesResult {
    double value = 0.0;
    long double max_term = 0.0L;
    bool converged = false;
};

inline constexpr int kMaxSeriesTerms = 400;

/// Taylor series in extended precision. max_term measures the cancellation
/// the double result is exposed to.
inline SeriesResult ml_series(double alpha, double beta, double z) {
    using Real = long double;
    CompensatedSum<Real> acc;
    const Real lz = std::log(std::abs(static_cast<Real>(z)));
    const bool negative = z < 0.0;
    Real max_term = 0;
    Real last = 0;
    for (int k = 0; k < kMaxSeriesTerms; ++k) {
        const Real arg = static_cast<Real>(alpha) * k + beta;
        Real term;
        if (arg < 1700.0L && k * std::abs(lz) < 11000.0L) {
            term = std::pow(static_cast<Real>(z), k) / std::tgamma(arg);
        } else {
            const Real mag = std::exp(k * lz - std::lgamma(arg));
            term = (negative && (k % 2 == 1)) ? -mag : mag;
        }
        acc.add(term);
        last = std::abs(term);
        if (last > max_term) max_term = last;
        if (k >= 1 && arg > 2.0L &&
            last < 1e-16L * (1.0L + std::abs(acc.value()))) {
            return {static_cast<double>(acc.value()), max_term, true};
        }
    }
    SeriesResult r{static_cast<double>(acc.value()), max_term, false};
    if (last < 1e-12L) r.converged = true;
    return r;
}

/// E_{alpha,beta}(-x), 0 < alpha < 1, x > 0, through the real integral
/// representation valid for |arg z| > alpha pi:
///   E = Int_eps^inf K(r) dr + Int_{-alpha pi}^{alpha pi} P(phi) dphi
/// with
///   K(r) = r^{(1-beta)/alpha} e^{-r^{1/alpha}}
///          (r sin(pi(1-beta)) + x sin(pi(1-beta+alpha)))
///          / (alpha pi (r^2 + 2 x r cos(alpha pi) + x^2)).
/// For beta < 1 + alpha the arc term vanishes as eps -> 0; otherwise eps = 1.
inline double ml_negative_integral(double alpha, double beta, double x) {
    using std::numbers::pi;
    const double expo = (1.0 - beta) / alpha;
    const double inv_a = 1.0 / alpha;
    const double s1 = std::sin(pi * (1.0 - beta));
    const double s2 = std::sin(pi * (1.0 - beta + alpha));
    const double c = std::cos(alpha * pi);
    auto radial = [=](double r) {
        if (r <= 0.0) return 0.0;
        const double den = r * r + 2.0 * x * r * c + x * x;
        return std::pow(r, expo) * std::exp(-std::pow(r, inv_a)) * (r * s1 + x * s2) / (alpha * pi * den);
    };
    const bool arc = beta >= 1.0 + alpha;
    const double lower = arc ? 1.0 : 0.0;
    // e^{-r^{1/alpha}} < 1e-26 beyond this point
    const double upper = std::pow(60.0, alpha);

    // bracket the near-pole of the denominator at r = -x cos(alpha pi)
    std::vector<double> cuts{lower, upper};
    if (lower < 1.0) cuts.push_back(1.0);
    const double peak = -x * c;
    if (peak > 0.0) {
        const double width = std::max(x * std::sin(alpha * pi), 1e-3);
        for (double r : {peak - width, peak, peak + width}) cuts.push_back(r);
    }
    std::sort(cuts.begin(), cuts.end());
    // the two-argument integrand form keeps abscissae strictly inside (lo, hi)
    boost::math::quadrature::tanh_sinh<double> quad;
    const auto integrate = [&](auto&& f, double lo, double hi) {
        return quad.integrate([&](double r, double) { return f(r); }, lo, hi, 1e-14);
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = std::max(cuts[i], lower);
        const double hi = std::min(cuts[i + 1], upper);
        if (hi - lo > 1e-9 * std::max(1.0, hi)) total += integrate(radial, lo, hi);
    }
    if (arc) {
        auto angular = [=](double phi) {
            const double w = std::sin(phi * inv_a) + phi * (1.0 + expo);
            const double den = 1.0 + 2.0 * x * std::cos(phi) + x * x;
            return std::exp(std::cos(phi * inv_a)) * (std::cos(w - phi) + x * std::cos(w)) / (2.0 * alpha * pi * den);
        };
        total += integrate(angular, -alpha * pi, 0.0) + integrate(angular, 0.0, alpha * pi);
    }
    return total;
}

}  // namespace detail

/// Gamma(x); throws pole_error on 0, -1, -2, ...
inline double gamma_fn(double x) {
    if (detail::is_nonpositive_integer(x)) {
        std::ostringstream os;
        os << "Gamma has a pole at " << x;
        throw pole_error(os.str());
    }
    return std::tgamma(x);
}

inline constexpr double kMittagLefflerZMax = 50.0;
inline constexpr double kMittagLefflerSeriesRadius = 15.0;

/// Real two-parameter Mittag-Leffler function for 0 < alpha <= 2, beta > 0
/// and |z| <= 50.
///
/// Routes: compensated Taylor series (|z| <= 15, and z < -15 for
/// alpha >= 1) whenever its cancellation stays below ~1e-12; otherwise, for
/// z < 0 and alpha < 1, a real integral representation. Positive z beyond 15
/// is rejected.
inline double mittag_leffler(MLParams p, double z) {
    if (!(p.alpha > 0.0) || !(p.beta > 0.0)) throw domain_error("Mittag-Leffler requires alpha > 0 and beta > 0");
    if (p.alpha > 2.0) throw domain_error("Mittag-Leffler is validated for alpha in (0,2] only");
    if (!std::isfinite(z) || std::abs(z) > kMittagLefflerZMax) {
        std::ostringstream os;
        os << "Mittag-Leffler argument z=" << z << " outside validated domain |z| <= " << kMittagLefflerZMax;
        throw domain_error(os.str());
    }
    if (z == 0.0) return 1.0 / gamma_fn(p.beta);

    // Largest term times extended-precision epsilon: the absolute error the
    // series leaves in the double result.
    constexpr long double kMaxSafeTerm = 1e-12L / (16.0L * std::numeric_limits<long double>::epsilon());
    const bool negative_fractional = z < 0.0 && p.alpha < 1.0;

    if (std::abs(z) <= kMittagLefflerSeriesRadius) {
        const auto s = detail::ml_series(p.alpha, p.beta, z);
        if (s.converged && s.max_term <= kMaxSafeTerm) return s.value;
        if (!negative_fractional) {
            std::ostringstream os;
            os << "Mittag-Leffler series lost precision at alpha=" << p.alpha << ", beta=" << p.beta
               << ", z=" << z;
            throw precision_loss_error(os.str());
        }
    } else if (z > 0.0) {
        std::ostringstream os;
        os << "Mittag-Leffler argument z=" << z << " outside validated domain z <= " << kMittagLefflerSeriesRadius;
        throw domain_error(os.str());
    } else if (!negative_fractional) {
        // alpha >= 1: the series cancellation grows like exp(|z|^{1/alpha}),
        // mild enough for alpha near 2 on the whole range
        const auto s = detail::ml_series(p.alpha, p.beta, z);
        if (s.converged && s.max_term <= kMaxSafeTerm) return s.value;
        std::ostringstream os;
        os << "Mittag-Leffler series lost precision at alpha=" << p.alpha << ", beta=" << p.beta << ", z=" << z;
        throw precision_loss_error(os.str());
    }

    return detail::ml_negative_integral(p.alpha, p.beta, -z);
}

/// One-parameter shorthand E_alpha(z).
inline double mittag_leffler(double alpha, double z) { return mittag_leffler(MLParams{alpha, 1.0}, z); }

}  // namespace fracemb
