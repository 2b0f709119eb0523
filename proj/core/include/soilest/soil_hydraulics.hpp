#pragma once

/**
 * @file soil_hydraulics.hpp
 * @brief Mualem - van Genuchten constitutive relations.
 *
 *   Se(h)  = [1 + (-alpha h)^n]^(-m),            m = 1 - 1/n
 *   theta  = theta_r + (theta_s - theta_r) Se
 *   K(h)   = K_s Se^(1/2) [1 - (1 - Se^(1/m))^m]^2
 *   C(h)   = d theta / dh
 *          = (theta_s - theta_r) alpha (n - 1) (-alpha h)^(n-1) [1 + (-alpha h)^n]^(-(1+m))
 *
 * All relations are written for h < 0. For h >= 0 the soil is saturated:
 * theta = theta_s, K = K_s, C = 0 (callers that divide by C apply a floor).
 *
 * (-alpha h)^n is evaluated in the log domain so that very dry heads do not
 * overflow.
 */

namespace soilest {

/// The five van Genuchten parameters at one location.
struct SoilParameters {
    double theta_s = 0.0; ///< saturated water content [m3/m3]
    double theta_r = 0.0; ///< residual water content [m3/m3]
    double K_s = 0.0;     ///< saturated hydraulic conductivity [m/s]
    double alpha = 0.0;   ///< inverse air-entry head [1/m]
    double n = 0.0;       ///< pore-size distribution exponent [-]

    friend bool operator==(const SoilParameters&, const SoilParameters&) = default;
};

/// 0 < theta_r < theta_s < 1, K_s > 0, alpha > 0, n > 1, all finite.
[[nodiscard]] bool is_valid(const SoilParameters& p) noexcept;

/// Throws DomainError naming the violated invariant.
void validate(const SoilParameters& p);

/// Every hydraulic quantity at one head, plus the head derivatives the
/// solver's Jacobian needs.
struct HydraulicState {
    double theta = 0.0;        ///< water content
    double conductivity = 0.0; ///< K(h)
    double capacity = 0.0;     ///< C(h), 0 on the saturated branch
    double d_conductivity = 0.0; ///< dK/dh
    double d_capacity = 0.0;     ///< dC/dh
};

/// Evaluates all relations at once. Throws DomainError for non-finite h or
/// invalid parameters.
[[nodiscard]] HydraulicState evaluate_hydraulics(double h, const SoilParameters& p);

/// Same as evaluate_hydraulics but skips parameter validation. For hot loops
/// over parameters already validated once.
[[nodiscard]] HydraulicState evaluate_hydraulics_unchecked(double h, const SoilParameters& p) noexcept;

[[nodiscard]] double water_content(double h, const SoilParameters& p);
[[nodiscard]] double hydraulic_conductivity(double h, const SoilParameters& p);
[[nodiscard]] double capillary_capacity(double h, const SoilParameters& p);

/// Representative loam (Carsel & Parrish class means).
[[nodiscard]] constexpr SoilParameters loam() noexcept {
    return {0.43, 0.078, 2.89e-6, 3.6, 1.56};
}

} // namespace soilest
