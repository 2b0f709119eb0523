#pragma once

#include "soilest/grid.hpp"
#include "soilest/soil_hydraulics.hpp"

#include <Eigen/Core>
#include <Eigen/LU>

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace soilest {

/// Cartesian sample position. x, y horizontal [m] relative to the pivot,
/// depth positive downward from the surface [m].
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double depth = 0.0;
};

struct SoilSample {
    Point3 position;
    SoilParameters params;
};

enum class SoilParameterId { theta_s, theta_r, K_s, alpha, n };

inline constexpr std::array<SoilParameterId, 5> all_soil_parameters = {
    SoilParameterId::theta_s, SoilParameterId::theta_r, SoilParameterId::K_s, SoilParameterId::alpha,
    SoilParameterId::n};

[[nodiscard]] std::string_view parameter_name(SoilParameterId id) noexcept;
[[nodiscard]] double get_parameter(const SoilParameters& p, SoilParameterId id) noexcept;
void set_parameter(SoilParameters& p, SoilParameterId id, double value) noexcept;

/// Kriging works on ln(K_s) so predictions stay positive; the other four
/// parameters are interpolated as-is.
[[nodiscard]] double to_kriging_space(SoilParameterId id, double value) noexcept;
[[nodiscard]] double from_kriging_space(SoilParameterId id, double value) noexcept;

enum class VariogramKind { exponential, spherical, gaussian };

[[nodiscard]] std::string_view to_string(VariogramKind kind) noexcept;
/// Throws ValidationError for unknown names.
[[nodiscard]] VariogramKind parse_variogram_kind(std::string_view name);

/// Semivariogram gamma(h) = nugget + (sill - nugget) * shape(h / range),
/// with gamma(0) = 0.
struct VariogramModel {
    VariogramKind kind = VariogramKind::exponential;
    double nugget = 0.0;
    double sill = 1.0;
    double range = 1.0;

    [[nodiscard]] double operator()(double h) const noexcept;
    /// nugget >= 0, sill > nugget, range > 0.
    void validate() const;
};

using ParameterModels = std::array<VariogramModel, 5>;

/// Distance with vertical anisotropy: a vertical separation d counts as
/// d / anisotropy_ratio horizontal metres.
struct KrigingGeometry {
    double anisotropy_ratio = 1.0 / 20.0;
    [[nodiscard]] double distance(const Point3& a, const Point3& b) const noexcept;
};

struct EmpiricalVariogram {
    std::vector<double> lag;
    std::vector<double> gamma;
    std::vector<int> pairs;
};

[[nodiscard]] EmpiricalVariogram empirical_variogram(std::span<const Point3> points, std::span<const double> values,
                                                     const KrigingGeometry& geometry, int lag_bins,
                                                     double max_lag_fraction);

struct VariogramFitOptions {
    VariogramKind kind = VariogramKind::exponential;
    int lag_bins = 10;
    double max_lag_fraction = 0.5;
    bool fit_nugget = false;
    KrigingGeometry geometry;
};

/// Weighted (pair-count) least squares fit of a variogram to the empirical
/// semivariogram. Needs at least 5 samples that are not all collocated.
[[nodiscard]] VariogramModel fit_variogram(std::span<const Point3> points, std::span<const double> values,
                                           const VariogramFitOptions& options = {});

/// Fits the model for one soil parameter (in kriging space, see
/// to_kriging_space).
[[nodiscard]] VariogramModel fit_variogram(std::span<const SoilSample> samples, SoilParameterId parameter,
                                           const VariogramFitOptions& options = {});

struct KrigingWeights {
    Eigen::VectorXd weights;
    double lagrange = 0.0;
};

/// Ordinary Kriging predictor for one scalar variable. The (n+1)x(n+1)
/// system is factorised once at construction; predictions are independent of
/// each other and safe to run concurrently.
class OrdinaryKriging {
public:
    OrdinaryKriging(std::vector<Point3> points, std::vector<double> values, VariogramModel model,
                    KrigingGeometry geometry = {});

    /// True when the Kriging matrix is rank deficient (e.g. duplicated
    /// sample positions). Predictions then fall back to nearest neighbour.
    [[nodiscard]] bool singular() const noexcept { return singular_; }

    /// Throws NumericalError when the system is singular.
    [[nodiscard]] KrigingWeights weights(const Point3& query) const;
    [[nodiscard]] double predict(const Point3& query) const;
    [[nodiscard]] double nearest_neighbour(const Point3& query) const;

private:
    [[nodiscard]] Eigen::VectorXd right_hand_side(const Point3& query) const;

    std::vector<Point3> points_;
    Eigen::VectorXd values_;
    VariogramModel model_;
    KrigingGeometry geometry_;
    Eigen::FullPivLU<Eigen::MatrixXd> lu_;
    bool singular_ = false;
};

/// Cartesian position of a grid node centre.
[[nodiscard]] Point3 node_point(const CylindricalGrid& grid, Index node);

/// Projects interpolated parameters back onto the physical constraints:
/// n >= 1.001, 0 < theta_r <= theta_s - 0.001, theta_s < 1, alpha, K_s > 0.
[[nodiscard]] SoilParameters project_to_valid(SoilParameters p) noexcept;

struct KrigedField {
    ParameterField field;
    std::vector<std::string> warnings;
    Index projected_nodes = 0;
};

[[nodiscard]] KrigedField krige_field(std::span<const SoilSample> samples, const CylindricalGrid& grid,
                                      const ParameterModels& models, const KrigingGeometry& geometry = {});

/// Fits one model per parameter with the given options.
[[nodiscard]] ParameterModels fit_parameter_models(std::span<const SoilSample> samples,
                                                   const VariogramFitOptions& options = {});

} // namespace soilest
