#include "soilest/grid.hpp"

#include "soilest/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace soilest {

CylindricalGrid::CylindricalGrid(int n_r, int n_az, int n_z, double radius_m, double depth_m)
    : n_r_(n_r), n_az_(n_az), n_z_(n_z), radius_(radius_m), depth_(depth_m) {
    std::vector<std::string> issues;
    if (n_r < 1) issues.emplace_back("grid.n_r must be >= 1");
    if (n_az < 2) issues.emplace_back("grid.n_az must be >= 2");
    if (n_z < 2) issues.emplace_back("grid.n_z must be >= 2");
    if (!(radius_m > 0.0) || !std::isfinite(radius_m)) issues.emplace_back("grid.radius_m must be > 0");
    if (!(depth_m > 0.0) || !std::isfinite(depth_m)) issues.emplace_back("grid.depth_m must be > 0");
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
}

CylindricalGrid CylindricalGrid::field_default() { return {6, 40, 22, 50.0, 0.75}; }

double CylindricalGrid::dtheta() const noexcept { return 2.0 * std::numbers::pi / n_az_; }

Index CylindricalGrid::node_index(int ir, int iaz, int iz) const {
    if (ir < 0 || ir >= n_r_ || iaz < 0 || iaz >= n_az_ || iz < 0 || iz >= n_z_) {
        throw IndexError("node (" + std::to_string(ir) + "," + std::to_string(iaz) + "," + std::to_string(iz) +
                         ") outside grid");
    }
    return (static_cast<Index>(iz) * n_az_ + iaz) * n_r_ + ir;
}

void CylindricalGrid::check(Index node) const {
    if (node < 0 || node >= size()) {
        throw IndexError("node index " + std::to_string(node) + " outside [0, " + std::to_string(size()) + ")");
    }
}

NodeCoord CylindricalGrid::coord(Index node) const {
    check(node);
    NodeCoord c;
    c.ir = static_cast<int>(node % n_r_);
    const Index rest = node / n_r_;
    c.iaz = static_cast<int>(rest % n_az_);
    c.iz = static_cast<int>(rest / n_az_);
    return c;
}

NodePosition CylindricalGrid::position(Index node) const {
    const NodeCoord c = coord(node);
    return {(c.ir + 0.5) * dr(), (c.iaz + 0.5) * dtheta(), (c.iz + 0.5) * dz()};
}

double CylindricalGrid::depth_below_surface(Index node) const { return depth_ - position(node).z; }

int CylindricalGrid::layer_at_depth(double depth_m) const {
    const double z = depth_ - depth_m;
    const int iz = static_cast<int>(std::floor(z / dz()));
    return std::clamp(iz, 0, n_z_ - 1);
}

double CylindricalGrid::cell_volume(Index node) const { return horizontal_area(node) * dz(); }

double CylindricalGrid::horizontal_area(Index node) const {
    const NodeCoord c = coord(node);
    return (c.ir + 0.5) * dr() * dr() * dtheta();
}

std::vector<Index> CylindricalGrid::layer_nodes(int iz) const {
    if (iz < 0 || iz >= n_z_) {
        throw IndexError("layer " + std::to_string(iz) + " outside [0, " + std::to_string(n_z_) + ")");
    }
    std::vector<Index> nodes(static_cast<std::size_t>(layer_size()));
    const Index first = static_cast<Index>(iz) * layer_size();
    for (Index i = 0; i < layer_size(); ++i) {
        nodes[static_cast<std::size_t>(i)] = first + i;
    }
    return nodes;
}

ParameterField uniform_field(const CylindricalGrid& grid, const SoilParameters& p) {
    validate(p);
    return ParameterField(static_cast<std::size_t>(grid.size()), p);
}

void validate_field(const CylindricalGrid& grid, const ParameterField& field) {
    std::vector<std::string> issues;
    if (static_cast<Index>(field.size()) != grid.size()) {
        issues.push_back("parameter field has " + std::to_string(field.size()) + " entries, grid has " +
                         std::to_string(grid.size()) + " nodes");
    }
    for (std::size_t i = 0; i < field.size() && issues.size() < 20; ++i) {
        if (!is_valid(field[i])) {
            issues.push_back("node " + std::to_string(i) + ": invalid soil parameters");
        }
    }
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
}

} // namespace soilest
