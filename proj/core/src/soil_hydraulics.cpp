#include "soilest/soil_hydraulics.hpp"

#include "soilest/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace soilest {

bool is_valid(const SoilParameters& p) noexcept {
    const bool finite = std::isfinite(p.theta_s) && std::isfinite(p.theta_r) && std::isfinite(p.K_s) &&
                        std::isfinite(p.alpha) && std::isfinite(p.n);
    return finite && p.theta_r > 0.0 && p.theta_r < p.theta_s && p.theta_s < 1.0 && p.K_s > 0.0 &&
           p.alpha > 0.0 && p.n > 1.0;
}

void validate(const SoilParameters& p) {
    if (is_valid(p)) {
        return;
    }
    std::string why;
    if (!(p.theta_r > 0.0)) why += " theta_r<=0";
    if (!(p.theta_r < p.theta_s)) why += " theta_r>=theta_s";
    if (!(p.theta_s < 1.0)) why += " theta_s>=1";
    if (!(p.K_s > 0.0)) why += " K_s<=0";
    if (!(p.alpha > 0.0)) why += " alpha<=0";
    if (!(p.n > 1.0)) why += " n<=1";
    if (why.empty()) why = " non-finite value";
    throw DomainError("invalid soil parameters:" + why);
}

HydraulicState evaluate_hydraulics_unchecked(double h, const SoilParameters& p) noexcept {
    HydraulicState s;
    if (h >= 0.0) {
        s.theta = p.theta_s;
        s.conductivity = p.K_s;
        return s;
    }

    const double m = 1.0 - 1.0 / p.n;
    const double ln_x = std::log(-p.alpha * h);
    const double ln_u = p.n * ln_x; // ln (-alpha h)^n
    // ln_w = ln(1 + u), d = ln(u / (1 + u)) <= 0
    double ln_w = 0.0;
    double d = 0.0;
    if (ln_u > 0.0) {
        const double e = std::exp(-ln_u);
        ln_w = ln_u + std::log1p(e);
        d = -std::log1p(e);
    } else {
        ln_w = std::log1p(std::exp(ln_u));
        d = ln_u - ln_w;
    }

    const double se = std::exp(-m * ln_w);
    s.theta = p.theta_r + (p.theta_s - p.theta_r) * se;

    // g = 1 - (1 - Se^(1/m))^m = 1 - (u/w)^m
    const double g = -std::expm1(m * d);
    const double ln_g = (g > std::numeric_limits<double>::min()) ? std::log(g) : std::log(m) - ln_u;
    const double ln_k = std::log(p.K_s) - 0.5 * m * ln_w + 2.0 * ln_g;
    s.conductivity = std::max(std::exp(ln_k), std::numeric_limits<double>::min());

    const double ln_c = std::log((p.theta_s - p.theta_r) * p.alpha * (p.n - 1.0)) + (p.n - 1.0) * ln_x -
                        (1.0 + m) * ln_w;
    s.capacity = std::exp(ln_c);

    const double q = std::exp(d); // u / w
    s.d_capacity = (s.capacity / h) * ((p.n - 1.0) - (1.0 + m) * p.n * q);
    const double tail = 2.0 * (1.0 - g) * std::exp(-ln_w - ln_g);
    s.d_conductivity = -(s.conductivity * p.n * m / h) * (0.5 * q + tail);
    return s;
}

HydraulicState evaluate_hydraulics(double h, const SoilParameters& p) {
    if (!std::isfinite(h)) {
        throw DomainError("pressure head must be finite");
    }
    validate(p);
    return evaluate_hydraulics_unchecked(h, p);
}

double water_content(double h, const SoilParameters& p) { return evaluate_hydraulics(h, p).theta; }

double hydraulic_conductivity(double h, const SoilParameters& p) {
    return evaluate_hydraulics(h, p).conductivity;
}

double capillary_capacity(double h, const SoilParameters& p) { return evaluate_hydraulics(h, p).capacity; }

} // namespace soilest
