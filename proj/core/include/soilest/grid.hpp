#pragma once

#include "soilest/soil_hydraulics.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace soilest {

using Index = Eigen::Index;

/// Pressure head at every grid node [m]; the system state.
using StateVector = Eigen::VectorXd;

/// Per-node soil parameters in grid order.
using ParameterField = std::vector<SoilParameters>;

struct NodeCoord {
    int ir = 0;
    int iaz = 0;
    int iz = 0;
    friend bool operator==(const NodeCoord&, const NodeCoord&) = default;
};

struct NodePosition {
    double r = 0.0;     ///< radial distance from the pivot [m]
    double theta = 0.0; ///< azimuth [rad]
    double z = 0.0;     ///< elevation above the bottom of the domain [m]
};

/// Cell-centred cylindrical discretisation of the field.
///
/// Node ordering is axial-major from the bottom layer upwards, then azimuthal,
/// then radial:
///
///     index = (iz * n_az + iaz) * n_r + ir
///
/// so the bottom layer holds indices [0, n_r*n_az) and the surface layer the
/// highest block. The first radial node sits at r = dr/2; no node is on the
/// axis. Azimuthal adjacency is periodic.
class CylindricalGrid {
public:
    CylindricalGrid(int n_r, int n_az, int n_z, double radius_m, double depth_m);

    /// 6 x 40 x 22 nodes over a 50 m radius, 0.75 m deep field.
    static CylindricalGrid field_default();

    [[nodiscard]] int n_r() const noexcept { return n_r_; }
    [[nodiscard]] int n_az() const noexcept { return n_az_; }
    [[nodiscard]] int n_z() const noexcept { return n_z_; }
    [[nodiscard]] double radius() const noexcept { return radius_; }
    [[nodiscard]] double depth() const noexcept { return depth_; }
    [[nodiscard]] double dr() const noexcept { return radius_ / n_r_; }
    [[nodiscard]] double dtheta() const noexcept;
    [[nodiscard]] double dz() const noexcept { return depth_ / n_z_; }

    [[nodiscard]] Index size() const noexcept { return static_cast<Index>(n_r_) * n_az_ * n_z_; }
    [[nodiscard]] Index layer_size() const noexcept { return static_cast<Index>(n_r_) * n_az_; }

    [[nodiscard]] Index node_index(int ir, int iaz, int iz) const;
    [[nodiscard]] Index node_index(const NodeCoord& c) const { return node_index(c.ir, c.iaz, c.iz); }
    [[nodiscard]] NodeCoord coord(Index node) const;
    [[nodiscard]] NodePosition position(Index node) const;

    /// Depth of the node centre below the soil surface [m].
    [[nodiscard]] double depth_below_surface(Index node) const;
    /// Layer whose centre is closest to the given depth below the surface.
    [[nodiscard]] int layer_at_depth(double depth_m) const;

    /// Volume of the annular-sector cell [m3].
    [[nodiscard]] double cell_volume(Index node) const;
    /// Horizontal area of the cell's top (or bottom) face [m2].
    [[nodiscard]] double horizontal_area(Index node) const;

    [[nodiscard]] std::vector<Index> layer_nodes(int iz) const;

    friend bool operator==(const CylindricalGrid&, const CylindricalGrid&) = default;

private:
    void check(Index node) const;

    int n_r_;
    int n_az_;
    int n_z_;
    double radius_;
    double depth_;
};

/// Uniform field with the same parameters at every node.
[[nodiscard]] ParameterField uniform_field(const CylindricalGrid& grid, const SoilParameters& p);

/// Throws ValidationError if the field is misaligned with the grid or any
/// entry is invalid.
void validate_field(const CylindricalGrid& grid, const ParameterField& field);

} // namespace soilest
