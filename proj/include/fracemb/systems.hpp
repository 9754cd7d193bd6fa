#pragma once

// Lagrangian and Hamiltonian systems as evaluatable functions with gradients,
// plus the built-in systems used by the experiments.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracemb/error.hpp"
#include "fracemb/random.hpp"

namespace fracemb {

using Vec = std::vector<double>;
using ConstVec = std::span<const double>;

/// Potential part of a natural system L = m|v|^2/2 - U(x), H = |p|^2/(2m) + U(x).
struct NaturalForm {
    double mass = 1.0;
    std::function<double(ConstVec)> potential;
    std::function<Vec(ConstVec)> potential_gradient;
};

struct LagrangianSystem {
    std::string name;
    std::size_t dim = 1;
    std::function<double(ConstVec x, ConstVec v, double t)> lagrangian;
    std::function<Vec(ConstVec x, ConstVec v, double t)> grad_x;  // d1 L
    std::function<Vec(ConstVec x, ConstVec v, double t)> grad_v;  // d2 L
    std::optional<NaturalForm> natural;
};

struct HamiltonianSystem {
    std::string name;
    std::size_t dim = 1;
    std::function<double(ConstVec x, ConstVec p)> hamiltonian;
    std::function<Vec(ConstVec x, ConstVec p)> grad_x;  // d1 H
    std::function<Vec(ConstVec x, ConstVec p)> grad_p;  // d2 H
    std::optional<NaturalForm> natural;                 // separable: enables Verlet
};

inline double dot(ConstVec a, ConstVec b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline LagrangianSystem natural_lagrangian(std::string name, std::size_t dim, NaturalForm form) {
    if (!(form.mass > 0.0)) throw domain_error("natural Lagrangian needs mass > 0");
    LagrangianSystem sys;
    sys.name = std::move(name);
    sys.dim = dim;
    sys.lagrangian = [form](ConstVec x, ConstVec v, double) { return 0.5 * form.mass * dot(v, v) - form.potential(x); };
    sys.grad_x = [form](ConstVec x, ConstVec, double) {
        Vec g = form.potential_gradient(x);
        for (double& c : g) c = -c;
        return g;
    };
    sys.grad_v = [m = form.mass](ConstVec, ConstVec v, double) {
        Vec g(v.begin(), v.end());
        for (double& c : g) c *= m;
        return g;
    };
    sys.natural = std::move(form);
    return sys;
}

/// L = m v^2/2 - m omega^2 x^2/2 in one dimension.
inline LagrangianSystem harmonic_lagrangian(double mass = 1.0, double omega = 1.0) {
    const double k = mass * omega * omega;
    NaturalForm form{mass, [k](ConstVec x) { return 0.5 * k * x[0] * x[0]; }, [k](ConstVec x) { return Vec{k * x[0]}; }};
    return natural_lagrangian("harmonic", 1, std::move(form));
}

inline LagrangianSystem free_particle_lagrangian(double mass = 1.0) {
    NaturalForm form{mass, [](ConstVec) { return 0.0; }, [](ConstVec x) { return Vec(x.size(), 0.0); }};
    return natural_lagrangian("free-particle", 1, std::move(form));
}

/// L = v^2/2 - lambda x^4/4.
inline LagrangianSystem quartic_lagrangian(double lambda = 1.0) {
    NaturalForm form{1.0, [lambda](ConstVec x) { return 0.25 * lambda * std::pow(x[0], 4); },
                     [lambda](ConstVec x) { return Vec{lambda * x[0] * x[0] * x[0]}; }};
    return natural_lagrangian("quartic", 1, std::move(form));
}

/// Largest relative error between analytic and central-difference gradients
/// of L over `probes` random points in [-2,2]^{2d}.
inline double lagrangian_gradient_error(const LagrangianSystem& sys, std::size_t probes, std::uint64_t seed) {
    CounterRng rng(seed, 0, 0);
    double worst = 0.0;
    for (std::size_t k = 0; k < probes; ++k) {
        Vec x(sys.dim), v(sys.dim);
        for (auto& c : x) c = 4.0 * rng.uniform_open() - 2.0;
        for (auto& c : v) c = 4.0 * rng.uniform_open() - 2.0;
        const double t = rng.uniform_open();
        const Vec gx = sys.grad_x(x, v, t);
        const Vec gv = sys.grad_v(x, v, t);
        for (std::size_t i = 0; i < sys.dim; ++i) {
            const double h = 1e-5;
            Vec xp = x, xm = x, vp = v, vm = v;
            xp[i] += h;
            xm[i] -= h;
            vp[i] += h;
            vm[i] -= h;
            const double fdx = (sys.lagrangian(xp, v, t) - sys.lagrangian(xm, v, t)) / (2 * h);
            const double fdv = (sys.lagrangian(x, vp, t) - sys.lagrangian(x, vm, t)) / (2 * h);
            worst = std::max(worst, std::abs(fdx - gx[i]) / (1.0 + std::abs(gx[i])));
            worst = std::max(worst, std::abs(fdv - gv[i]) / (1.0 + std::abs(gv[i])));
        }
    }
    return worst;
}

inline double hamiltonian_gradient_error(const HamiltonianSystem& sys, std::size_t probes, std::uint64_t seed) {
    CounterRng rng(seed, 0, 1);
    double worst = 0.0;
    for (std::size_t k = 0; k < probes; ++k) {
        Vec x(sys.dim), p(sys.dim);
        for (auto& c : x) c = 4.0 * rng.uniform_open() - 2.0;
        for (auto& c : p) c = 4.0 * rng.uniform_open() - 2.0;
        const Vec gx = sys.grad_x(x, p);
        const Vec gp = sys.grad_p(x, p);
        for (std::size_t i = 0; i < sys.dim; ++i) {
            const double h = 1e-5;
            Vec xp = x, xm = x, pp = p, pm = p;
            xp[i] += h;
            xm[i] -= h;
            pp[i] += h;
            pm[i] -= h;
            const double fdx = (sys.hamiltonian(xp, p) - sys.hamiltonian(xm, p)) / (2 * h);
            const double fdp = (sys.hamiltonian(x, pp) - sys.hamiltonian(x, pm)) / (2 * h);
            worst = std::max(worst, std::abs(fdx - gx[i]) / (1.0 + std::abs(gx[i])));
            worst = std::max(worst, std::abs(fdp - gp[i]) / (1.0 + std::abs(gp[i])));
        }
    }
    return worst;
}

/// Probes whether d1 H and d2 H are affine (midpoint rule on random pairs),
/// the regime where expectation commutes with the gradients.
inline bool has_affine_gradients(const HamiltonianSystem& sys, std::size_t probes = 32, std::uint64_t seed = 7) {
    CounterRng rng(seed, 0, 2);
    auto draw = [&] {
        Vec v(sys.dim);
        for (auto& c : v) c = 4.0 * rng.uniform_open() - 2.0;
        return v;
    };
    for (std::size_t k = 0; k < probes; ++k) {
        const Vec x1 = draw(), p1 = draw(), x2 = draw(), p2 = draw();
        Vec xm(sys.dim), pm(sys.dim);
        for (std::size_t i = 0; i < sys.dim; ++i) {
            xm[i] = 0.5 * (x1[i] + x2[i]);
            pm[i] = 0.5 * (p1[i] + p2[i]);
        }
        const Vec gx1 = sys.grad_x(x1, p1), gx2 = sys.grad_x(x2, p2), gxm = sys.grad_x(xm, pm);
        const Vec gp1 = sys.grad_p(x1, p1), gp2 = sys.grad_p(x2, p2), gpm = sys.grad_p(xm, pm);
        for (std::size_t i = 0; i < sys.dim; ++i) {
            const double ex = std::abs(gxm[i] - 0.5 * (gx1[i] + gx2[i]));
            const double ep = std::abs(gpm[i] - 0.5 * (gp1[i] + gp2[i]));
            if (ex > 1e-9 * (1.0 + std::abs(gxm[i])) || ep > 1e-9 * (1.0 + std::abs(gpm[i]))) return false;
        }
    }
    return true;
}

}  // namespace fracemb
