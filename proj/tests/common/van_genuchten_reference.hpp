#pragma once

// Independent extended-precision van Genuchten-Mualem relations, written
// directly from the closed forms, used as test oracles. Derivatives are
// Richardson-extrapolated central differences of these functions.

#include "soilest/soil_hydraulics.hpp"

#include <cmath>

namespace soilest::reference {

using Real = long double;

/// x = |alpha h|^n.
inline Real vg_x(Real h, const SoilParameters& p) { return std::pow(std::fabs(Real(p.alpha) * h), Real(p.n)); }

/// theta_s - theta(h), accurate also next to saturation.
inline Real deficit(Real h, const SoilParameters& p) {
    const Real m = 1 - 1 / Real(p.n);
    return -(Real(p.theta_s) - Real(p.theta_r)) * std::expm1(-m * std::log1p(vg_x(h, p)));
}

inline Real theta(Real h, const SoilParameters& p) {
    return h >= 0 ? Real(p.theta_s) : Real(p.theta_s) - deficit(h, p);
}

inline Real conductivity(Real h, const SoilParameters& p) {
    if (h >= 0) return Real(p.K_s);
    const Real m = 1 - 1 / Real(p.n);
    const Real x = vg_x(h, p);
    const Real se = std::exp(-m * std::log1p(x));
    // 1 - (1 - Se^(1/m))^m with 1 - Se^(1/m) = x / (1 + x) = 1 / (1 + 1/x)
    const Real bracket = -std::expm1(-m * std::log1p(1 / x));
    return Real(p.K_s) * std::sqrt(se) * bracket * bracket;
}

template <class F>
Real derivative(F&& f, Real h) {
    const Real d = Real(1e-3) * std::fabs(h);
    auto central = [&](Real s) { return (f(h + s) - f(h - s)) / (2 * s); };
    return (4 * central(d / 2) - central(d)) / 3;
}

/// dtheta/dh.
inline Real capacity(Real h, const SoilParameters& p) {
    return -derivative([&](Real v) { return deficit(v, p); }, h);
}

/// dK/dh.
inline Real d_conductivity(Real h, const SoilParameters& p) {
    return derivative([&](Real v) { return conductivity(v, p); }, h);
}

} // namespace soilest::reference
