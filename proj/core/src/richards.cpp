#include "soilest/richards.hpp"

#include "soilest/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace soilest {

// --- IrrigationSchedule -----------------------------------------------------

IrrigationSchedule::IrrigationSchedule(std::vector<IrrigationEvent> events, std::optional<PivotSweep> pivot)
    : events_(std::move(events)), pivot_(pivot) {
    std::sort(events_.begin(), events_.end(),
              [](const IrrigationEvent& a, const IrrigationEvent& b) { return a.start_s < b.start_s; });
    std::vector<std::string> issues;
    for (std::size_t i = 0; i < events_.size(); ++i) {
        const auto& e = events_[i];
        if (!std::isfinite(e.start_s) || !std::isfinite(e.end_s) || !(e.end_s >= e.start_s)) {
            issues.push_back("irrigation event " + std::to_string(i) + ": end before start");
        }
        if (!(e.rate_m_per_s >= 0.0) || !std::isfinite(e.rate_m_per_s)) {
            issues.push_back("irrigation event " + std::to_string(i) + ": rate must be >= 0");
        }
        if (i > 0 && e.start_s < events_[i - 1].end_s) {
            issues.push_back("irrigation event " + std::to_string(i) + " overlaps the previous one");
        }
    }
    if (pivot_) {
        if (!(pivot_->angular_speed_rad_per_s > 0.0)) issues.emplace_back("pivot angular speed must be > 0");
        if (!(pivot_->sector_width_rad > 0.0) || pivot_->sector_width_rad > 2.0 * std::numbers::pi) {
            issues.emplace_back("pivot sector width must be in (0, 2*pi]");
        }
    }
    if (!issues.empty()) {
        throw ValidationError(std::move(issues));
    }
}

IrrigationSchedule IrrigationSchedule::daily(double rate_m_per_s, double start_of_day_s, double duration_s, int days) {
    std::vector<IrrigationEvent> events;
    for (int d = 0; d < days; ++d) {
        const double start = d * 86400.0 + start_of_day_s;
        events.push_back({start, start + duration_s, rate_m_per_s});
    }
    return IrrigationSchedule(std::move(events));
}

const IrrigationEvent* IrrigationSchedule::active(double t) const noexcept {
    // Intervals are (start, end]: implicit steps sample the forcing at the end
    // of each sub-step, so a sub-step that exactly covers an event sees it.
    auto it = std::lower_bound(events_.begin(), events_.end(), t,
                               [](const IrrigationEvent& e, double value) { return e.start_s < value; });
    if (it == events_.begin()) {
        return nullptr;
    }
    --it;
    return t <= it->end_s ? &*it : nullptr;
}

double IrrigationSchedule::next_switch(double after) const noexcept {
    double next = std::numeric_limits<double>::infinity();
    for (const auto& e : events_) {
        if (e.start_s > after) next = std::min(next, e.start_s);
        if (e.end_s > after) next = std::min(next, e.end_s);
        if (e.start_s > next) break;
    }
    return next;
}

double IrrigationSchedule::field_rate(double t) const noexcept {
    const IrrigationEvent* e = active(t);
    return e != nullptr ? e->rate_m_per_s : 0.0;
}

std::optional<double> IrrigationSchedule::pivot_angle(double t) const noexcept {
    const IrrigationEvent* e = active(t);
    if (e == nullptr || !pivot_) {
        return std::nullopt;
    }
    const double two_pi = 2.0 * std::numbers::pi;
    const double angle = pivot_->start_angle_rad + pivot_->angular_speed_rad_per_s * (t - e->start_s);
    double wrapped = std::fmod(angle, two_pi);
    if (wrapped < 0.0) {
        wrapped += two_pi;
    }
    return wrapped;
}

double IrrigationSchedule::local_rate(double t, double azimuth) const noexcept {
    const IrrigationEvent* e = active(t);
    if (e == nullptr) {
        return 0.0;
    }
    if (!pivot_) {
        return e->rate_m_per_s;
    }
    const double two_pi = 2.0 * std::numbers::pi;
    const double boom = *pivot_angle(t);
    double diff = std::fmod(std::abs(azimuth - boom), two_pi);
    diff = std::min(diff, two_pi - diff);
    if (diff <= 0.5 * pivot_->sector_width_rad) {
        return e->rate_m_per_s * two_pi / pivot_->sector_width_rad;
    }
    return 0.0;
}

// --- SinkField --------------------------------------------------------------

SinkField::SinkField(std::vector<double> rates) : rates_(std::move(rates)) {
    for (std::size_t i = 0; i < rates_.size(); ++i) {
        if (!(rates_[i] >= 0.0) || !std::isfinite(rates_[i])) {
            throw ValidationError("sink rate at node " + std::to_string(i) + " must be finite and >= 0");
        }
    }
}

SinkField SinkField::root_zone(const CylindricalGrid& grid, double rate, double root_depth_m) {
    std::vector<double> rates(static_cast<std::size_t>(grid.size()), 0.0);
    for (Index i = 0; i < grid.size(); ++i) {
        if (grid.depth_below_surface(i) <= root_depth_m) {
            rates[static_cast<std::size_t>(i)] = rate;
        }
    }
    return SinkField(std::move(rates));
}

double SinkField::rate(double /*t*/, Index node) const { return rates_.at(static_cast<std::size_t>(node)); }

// --- RichardsModel ----------------------------------------------------------

RichardsModel::RichardsModel(CylindricalGrid grid, ParameterField params, BoundaryConditions bc, Forcing forcing,
                             std::shared_ptr<const SinkModel> sink, ModelOptions options)
    : grid_(std::move(grid)), params_(std::move(params)), bc_(bc), forcing_(std::move(forcing)),
      sink_(std::move(sink)), options_(options) {
    validate_field(grid_, params_);
    if (!(options_.capacity_floor > 0.0)) {
        throw ValidationError("capacity floor must be > 0");
    }
    if (options_.linear && (!(options_.linear->conductivity > 0.0) || !(options_.linear->capacity > 0.0))) {
        throw ValidationError("linear test mode needs positive conductivity and capacity");
    }

    const Index n = grid_.size();
    volume_.resize(static_cast<std::size_t>(n));
    top_area_.resize(static_cast<std::size_t>(n));
    azimuth_.resize(static_cast<std::size_t>(n));
    const double dr = grid_.dr();
    const double dth = grid_.dtheta();
    const double dz = grid_.dz();
    faces_.reserve(static_cast<std::size_t>(3 * n));
    for (Index i = 0; i < n; ++i) {
        const NodeCoord c = grid_.coord(i);
        const double rc = (c.ir + 0.5) * dr;
        volume_[static_cast<std::size_t>(i)] = grid_.cell_volume(i);
        top_area_[static_cast<std::size_t>(i)] = grid_.horizontal_area(i);
        azimuth_[static_cast<std::size_t>(i)] = grid_.position(i).theta;
        if (c.ir + 1 < grid_.n_r()) {
            const double rf = (c.ir + 1) * dr;
            faces_.push_back({i, grid_.node_index(c.ir + 1, c.iaz, c.iz), rf * dth * dz / dr, 0.0});
        }
        faces_.push_back(
            {i, grid_.node_index(c.ir, (c.iaz + 1) % grid_.n_az(), c.iz), dr * dz / (rc * dth), 0.0});
        if (c.iz + 1 < grid_.n_z()) {
            const double area = rc * dr * dth;
            faces_.push_back({i, grid_.node_index(c.ir, c.iaz, c.iz + 1), area / dz, area});
        }
    }
}

double RichardsModel::face_conductivity(double ka, double kb) const noexcept {
    return options_.mean == ConductivityMean::arithmetic ? 0.5 * (ka + kb) : std::sqrt(ka * kb);
}

void RichardsModel::node_states(const Eigen::VectorXd& x, std::vector<NodeState>& out) const {
    if (x.size() != grid_.size()) {
        throw DomainError("state length " + std::to_string(x.size()) + " does not match grid size " +
                          std::to_string(grid_.size()));
    }
    out.resize(static_cast<std::size_t>(x.size()));
    for (Index i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x(i))) {
            throw IntegrationError("non-finite head at node " + std::to_string(i), static_cast<long>(i));
        }
        NodeState& s = out[static_cast<std::size_t>(i)];
        if (options_.linear) {
            s = {options_.linear->conductivity, 0.0, options_.linear->capacity, 0.0};
            continue;
        }
        const HydraulicState hs = evaluate_hydraulics_unchecked(x(i), params_[static_cast<std::size_t>(i)]);
        s.k = hs.conductivity;
        s.dk = hs.d_conductivity;
        if (hs.capacity < options_.capacity_floor) {
            s.c = options_.capacity_floor;
            s.dc = 0.0;
        } else {
            s.c = hs.capacity;
            s.dc = hs.d_capacity;
        }
    }
}

double RichardsModel::face_flux(const Face& face, const Eigen::VectorXd& x) const {
    std::vector<NodeState> st;
    node_states(x, st);
    const double kf = face_conductivity(st[static_cast<std::size_t>(face.a)].k, st[static_cast<std::size_t>(face.b)].k);
    const double grav = options_.gravity ? 1.0 : 0.0;
    return kf * (face.transmissibility * (x(face.a) - x(face.b)) - grav * face.gravity_area);
}

void RichardsModel::assemble(double t, const Eigen::VectorXd& x, const std::vector<NodeState>& st,
                             Eigen::VectorXd& net, std::vector<Eigen::Triplet<double>>* triplets) const {
    const Index n = grid_.size();
    const double grav = options_.gravity ? 1.0 : 0.0;
    const bool geometric = options_.mean == ConductivityMean::geometric;

    net = Eigen::VectorXd::Zero(n);
    if (triplets != nullptr) {
        triplets->clear();
        triplets->reserve(faces_.size() * 4 + static_cast<std::size_t>(n));
    }

    for (const Face& f : faces_) {
        const NodeState& sa = st[static_cast<std::size_t>(f.a)];
        const NodeState& sb = st[static_cast<std::size_t>(f.b)];
        const double kf = face_conductivity(sa.k, sb.k);
        const double drive = f.transmissibility * (x(f.a) - x(f.b)) - grav * f.gravity_area;
        const double flux = kf * drive;
        net(f.a) -= flux;
        net(f.b) += flux;
        if (triplets != nullptr) {
            const double dkf_da = geometric ? 0.5 * kf * sa.dk / sa.k : 0.5 * sa.dk;
            const double dkf_db = geometric ? 0.5 * kf * sb.dk / sb.k : 0.5 * sb.dk;
            const double dflux_da = dkf_da * drive + kf * f.transmissibility;
            const double dflux_db = dkf_db * drive - kf * f.transmissibility;
            triplets->emplace_back(f.a, f.a, -dflux_da);
            triplets->emplace_back(f.a, f.b, -dflux_db);
            triplets->emplace_back(f.b, f.a, dflux_da);
            triplets->emplace_back(f.b, f.b, dflux_db);
        }
    }

    const Index layer = grid_.layer_size();
    const Index top_first = n - layer;
    for (Index i = top_first; i < n; ++i) {
        const auto s = static_cast<std::size_t>(i);
        net(i) += forcing_.top_flux(t, azimuth_[s]) * top_area_[s];
    }
    if (bc_.bottom == BottomBoundary::free_drainage) {
        for (Index i = 0; i < layer; ++i) {
            const auto s = static_cast<std::size_t>(i);
            net(i) -= grav * st[s].k * top_area_[s];
            if (triplets != nullptr) {
                triplets->emplace_back(i, i, -grav * st[s].dk * top_area_[s]);
            }
        }
    }
    if (sink_) {
        for (Index i = 0; i < n; ++i) {
            net(i) -= sink_->rate(t, i) * volume_[static_cast<std::size_t>(i)];
        }
    }
}

void RichardsModel::evaluate(double t, const Eigen::VectorXd& x, Eigen::VectorXd* rhs_out,
                             Eigen::SparseMatrix<double>* jac_out) const {
    std::vector<NodeState> st;
    node_states(x, st);
    const Index n = grid_.size();
    Eigen::VectorXd net;
    std::vector<Eigen::Triplet<double>> triplets;
    assemble(t, x, st, net, jac_out != nullptr ? &triplets : nullptr);

    Eigen::VectorXd balance(n); // net / V  [1/s]
    for (Index i = 0; i < n; ++i) {
        balance(i) = net(i) / volume_[static_cast<std::size_t>(i)];
    }

    if (rhs_out != nullptr) {
        rhs_out->resize(n);
        for (Index i = 0; i < n; ++i) {
            (*rhs_out)(i) = balance(i) / st[static_cast<std::size_t>(i)].c;
        }
    }

    if (jac_out != nullptr) {
        for (Index i = 0; i < n; ++i) {
            const NodeState& si = st[static_cast<std::size_t>(i)];
            // d(1/C)/dh term; the row scaling below divides by V*C, so pre-multiply by V.
            triplets.emplace_back(i, i, -balance(i) * si.dc / si.c * volume_[static_cast<std::size_t>(i)]);
        }
        Eigen::SparseMatrix<double> jac(n, n);
        jac.setFromTriplets(triplets.begin(), triplets.end());
        Eigen::VectorXd row_scale(n);
        for (Index i = 0; i < n; ++i) {
            row_scale(i) = 1.0 / (volume_[static_cast<std::size_t>(i)] * st[static_cast<std::size_t>(i)].c);
        }
        *jac_out = row_scale.asDiagonal() * jac;
        jac_out->makeCompressed();
    }
}

void RichardsModel::storage(const Eigen::VectorXd& x, Eigen::VectorXd& m, Eigen::VectorXd& dm) const {
    std::vector<NodeState> st;
    node_states(x, st);
    m.resize(x.size());
    dm.resize(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        const auto s = static_cast<std::size_t>(i);
        const double theta = options_.linear ? options_.linear->capacity * x(i)
                                             : evaluate_hydraulics_unchecked(x(i), params_[s]).theta;
        m(i) = volume_[s] * theta;
        dm(i) = volume_[s] * st[s].c;
    }
}

void RichardsModel::flux(double t, const Eigen::VectorXd& x, Eigen::VectorXd& g,
                         Eigen::SparseMatrix<double>* dg) const {
    std::vector<NodeState> st;
    node_states(x, st);
    std::vector<Eigen::Triplet<double>> triplets;
    assemble(t, x, st, g, dg != nullptr ? &triplets : nullptr);
    if (dg != nullptr) {
        dg->resize(grid_.size(), grid_.size());
        dg->setFromTriplets(triplets.begin(), triplets.end());
        dg->makeCompressed();
    }
}

Eigen::VectorXd RichardsModel::rhs(double t, const Eigen::VectorXd& x) const {
    Eigen::VectorXd out;
    evaluate(t, x, &out, nullptr);
    return out;
}

Eigen::SparseMatrix<double> RichardsModel::jacobian(double t, const Eigen::VectorXd& x) const {
    Eigen::SparseMatrix<double> out;
    evaluate(t, x, nullptr, &out);
    return out;
}

Eigen::VectorXd RichardsModel::net_inflow(double t, const Eigen::VectorXd& x) const {
    Eigen::VectorXd g;
    flux(t, x, g, nullptr);
    return g;
}

Eigen::VectorXd RichardsModel::water_content(const Eigen::VectorXd& x) const {
    Eigen::VectorXd theta(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        theta(i) = evaluate_hydraulics_unchecked(x(i), params_[static_cast<std::size_t>(i)]).theta;
    }
    return theta;
}

double RichardsModel::next_discontinuity(double t_from, double t_to) const {
    return std::min({t_to, forcing_.irrigation.next_switch(t_from), forcing_.rain.next_switch(t_from)});
}

double RichardsModel::total_water(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd theta = water_content(x);
    double total = 0.0;
    for (Index i = 0; i < theta.size(); ++i) {
        total += theta(i) * volume_[static_cast<std::size_t>(i)];
    }
    return total;
}

Trajectory water_content_trajectory(const RichardsModel& model, const Trajectory& heads) {
    Trajectory out;
    out.times = heads.times;
    out.states.reserve(heads.states.size());
    for (const auto& x : heads.states) {
        out.states.push_back(model.water_content(x));
    }
    return out;
}

Eigen::VectorXd hydrostatic_state(const CylindricalGrid& grid, double total_head) {
    Eigen::VectorXd h(grid.size());
    for (Index i = 0; i < grid.size(); ++i) {
        h(i) = total_head - grid.position(i).z;
    }
    return h;
}

} // namespace soilest
