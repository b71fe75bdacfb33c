#include "geodss/steering.hpp"

#include "geodss/errors.hpp"
#include "geodss/parallel.hpp"
#include "geodss/random.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace geodss {

namespace {

constexpr std::uint64_t kObserveStream = 0;
constexpr std::uint64_t kAssimilateStream = 1;

} // namespace

void SessionConfig::validate() const {
    geostat.validate();
    tool.validate();
    weights.validate();
    constraints.validate();
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ArgumentError("gamma must lie in [0, 1]");
    if (ensemble_size < 2) throw ArgumentError("ensemble_size must be >= 2");
    if (!(std::isfinite(horizontal_length) && horizontal_length > 0.0))
        throw ArgumentError("horizontal_length must be > 0");
    if (!(start_inclination > 0.0 && start_inclination <= 90.0))
        throw ArgumentError("start_inclination must lie in (0, 90]");
    if (quadrature.base_cells < 1) throw ArgumentError("quadrature base_cells must be >= 1");
    const DecisionGrid g = grid();
    g.validate();
    g.z_index(start_height);
    if (truth) {
        if (truth->layer_resistivities() != geostat.layer_resistivities)
            throw ArgumentError("preset truth resistivities differ from the geostatistical parameters");
        if (truth->x_min() > g.x(0) || truth->x_max() < g.x(g.steps))
            throw ArgumentError("preset truth does not cover the lateral");
    }
}

DecisionGrid SessionConfig::grid() const {
    DecisionGrid g;
    g.steps = static_cast<int>(std::ceil(horizontal_length / g.dx - 1e-9));
    g.constraints = constraints;
    return g;
}

BitState SessionConfig::start_bit() const {
    return {0, grid().z_index(start_height), start_inclination};
}

TruthSource::TruthSource(EarthRealization truth, ToolSpec tool, std::uint64_t noise_seed)
    : truth_(std::move(truth)), tool_(std::move(tool)), noise_seed_(noise_seed) {}

MeasurementVector TruthSource::measure(int step, Station station) {
    return observe(truth_, station, tool_, derive_seed(noise_seed_, static_cast<std::uint64_t>(step), kObserveStream));
}

ReplaySource::ReplaySource(std::vector<MeasurementVector> log) : log_(std::move(log)) {}

MeasurementVector ReplaySource::measure(int step, Station station) {
    if (step < 1 || static_cast<std::size_t>(step) > log_.size())
        throw ArgumentError("no recorded measurement for stand " + std::to_string(step));
    const auto& m = log_[static_cast<std::size_t>(step - 1)];
    if (m.station != station) throw ArgumentError("recorded station differs from the bit position");
    return m;
}

SteeringSession::SteeringSession(SessionConfig config) : config_(std::move(config)) {
    config_.validate();
    truth_ = config_.truth ? *config_.truth : generate_truth(config_.geostat, config_.seeds.truth);
    source_ = std::make_unique<TruthSource>(*truth_, config_.tool, config_.seeds.noise);
    init();
}

SteeringSession::SteeringSession(SessionConfig config, std::unique_ptr<MeasurementSource> source)
    : config_(std::move(config)), source_(std::move(source)) {
    if (!source_) throw ArgumentError("measurement source is null");
    if (config_.perfect_information) throw ArgumentError("perfect information needs the truth");
    config_.truth.reset();
    config_.validate();
    init();
}

SteeringSession::SteeringSession(SteeringSession&&) noexcept = default;
SteeringSession& SteeringSession::operator=(SteeringSession&&) noexcept = default;
SteeringSession::~SteeringSession() = default;

void SteeringSession::init() {
    grid_ = config_.grid();
    value_ = ValueFunction(config_.weights, config_.quadrature);
    if (config_.perfect_information) {
        ensemble_ = Ensemble(std::vector<EarthRealization>(config_.ensemble_size, *truth_));
    } else {
        ensemble_ = generate_ensemble(config_.geostat, config_.ensemble_size, config_.seeds.ensemble);
    }
    bit_ = config_.start_bit();
    drilled_ = {{grid_.x(bit_.k), grid_.z(bit_.z_index)}};
    recompute();
}

const EarthRealization& SteeringSession::truth() const {
    if (!truth_) throw SessionStateError("session has no truth");
    return *truth_;
}

std::vector<MeasurementVector> SteeringSession::measurement_log() const {
    std::vector<MeasurementVector> log;
    for (const auto& r : history_)
        if (r.measurement) log.push_back(*r.measurement);
    return log;
}

void SteeringSession::recompute() {
    recommendation_ = robust_decision(grid_, ensemble_, value_, config_.gamma, bit_);
}

void SteeringSession::step(std::optional<Decision> decision) {
    if (status_ != SessionStatus::drilling) throw SessionStateError("session is not drilling");

    const bool human = decision.has_value() && decision->kind != Decision::Kind::accept;
    StepRecord record;
    record.step = static_cast<int>(history_.size()) + 1;
    record.human = human;

    int drop = kStop;
    if (!decision || decision->kind == Decision::Kind::accept) {
        drop = recommendation_.action == Action::steer ? recommendation_.drop : kStop;
    } else if (decision->kind == Decision::Kind::steer) {
        if (bit_.k >= grid_.steps) throw ConstraintViolation("grid_bounds", "no decision point left");
        const std::size_t to = grid_.z_index(decision->target_z);
        const Segment seg{{grid_.x(bit_.k), grid_.z(bit_.z_index)}, {grid_.x(bit_.k + 1), grid_.z(to)}};
        if (to > bit_.z_index) throw ConstraintViolation("non_climbing", "target lies above the bit");
        const double a = inclination(seg);
        if (a > grid_.constraints.max_inclination + kAngleTolerance)
            throw ConstraintViolation("max_inclination", "target exceeds the maximum inclination");
        if (!dogleg_ok(bit_.inclination, seg, grid_.constraints))
            throw ConstraintViolation("dogleg", "inclination change exceeds the dogleg limit");
        drop = static_cast<int>(bit_.z_index - to);
    }

    Mutation mutation;
    mutation.kind = Mutation::Kind::step;
    mutation.decision = decision;
    mutation.weights = value_.weights();

    if (drop == kStop) {
        record.action = Action::stop;
        record.target_z = grid_.z(bit_.z_index);
        record.inclination_deg = bit_.inclination;
        status_ = SessionStatus::stopped;
        recommendation_ = Recommendation{};
        recommendation_.target_z = record.target_z;
        recommendation_.inclination_deg = bit_.inclination;
        history_.push_back(std::move(record));
        mutations_.push_back(std::move(mutation));
        return;
    }

    bit_ = {bit_.k + 1, bit_.z_index - static_cast<std::size_t>(drop), grid_.drop_inclination(static_cast<std::size_t>(drop))};
    const Station station{grid_.x(bit_.k), grid_.z(bit_.z_index)};
    drilled_.push_back({station.x, station.z});
    record.action = Action::steer;
    record.target_z = station.z;
    record.inclination_deg = bit_.inclination;

    if (bit_.k >= grid_.steps) {
        status_ = SessionStatus::completed;
        recommendation_ = Recommendation{};
        recommendation_.target_z = station.z;
        recommendation_.inclination_deg = bit_.inclination;
    } else {
        record.measurement = source_->measure(record.step, station);
        if (config_.assimilate) {
            auto result = assimilate_with_diagnostics(
                ensemble_, station, *record.measurement, config_.tool,
                derive_seed(config_.seeds.noise, static_cast<std::uint64_t>(record.step), kAssimilateStream));
            ensemble_ = std::move(result.ensemble);
            record.diagnostics = result.diagnostics;
        }
        recompute();
    }
    history_.push_back(std::move(record));
    mutations_.push_back(std::move(mutation));
}

void SteeringSession::set_weights(const ObjectiveWeights& weights) {
    weights.validate();
    if (status_ != SessionStatus::drilling) throw SessionStateError("session is not drilling");
    value_.set_weights(weights);
    recompute();
    Mutation m;
    m.kind = Mutation::Kind::weights;
    m.weights = weights;
    mutations_.push_back(std::move(m));
}

std::vector<double> SteeringSession::drilled_value_by_member() const {
    std::vector<double> out(ensemble_.size());
    parallel_for(ensemble_.size(), [&](std::size_t j) { out[j] = trajectory_value(drilled_, ensemble_[j], value_); });
    return out;
}

double trajectory_value(const std::vector<Point>& trajectory, const EarthRealization& model,
                        const ValueFunction& value) {
    double total = 0.0;
    for (std::size_t s = trajectory.size(); s-- > 1;)
        total = value({trajectory[s - 1], trajectory[s]}, model) + 1.0 * total;
    return total;
}

LandedLayer landing_layer(const EarthRealization& truth, const std::vector<Point>& trajectory, int* stands) {
    std::vector<std::size_t> layers;
    for (std::size_t s = 1; s < trajectory.size(); ++s) {
        const Point& a = trajectory[s - 1];
        const Point& b = trajectory[s];
        const LayerInfo info = layer_query(truth, 0.5 * (a.x + b.x), 0.5 * (a.z + b.z));
        // A stand counts only if it lies wholly inside the midpoint's layer.
        // Boundaries are linear between knots, so the end points decide it.
        bool full = info.in_reservoir;
        for (const Point* p : {&a, &b}) {
            if (!full) break;
            const std::vector<double> d = truth.boundaries_at(p->x);
            const double roof = d[info.layer - 1];
            const double base = info.layer < d.size() ? d[info.layer] : -HUGE_VAL;
            full = p->z <= roof && p->z >= base;
        }
        layers.push_back(full ? info.layer : 0);
    }
    std::size_t landed = 0;
    for (std::size_t s = 1; s < layers.size(); ++s) {
        if (layers[s] != 0 && layers[s] == layers[s - 1]) {
            landed = layers[s];
            break;
        }
    }
    if (stands) {
        *stands = 0;
        for (std::size_t l : layers)
            if (landed != 0 && l == landed) ++*stands;
    }
    if (landed == 0) return LandedLayer::none;
    return landed / 2 == 0 ? LandedLayer::top : LandedLayer::bottom;
}

CaseMetrics SteeringSession::evaluate_case() const {
    if (status_ == SessionStatus::drilling) throw SessionStateError("case is still drilling");
    const EarthRealization& t = truth();
    CaseMetrics m;
    m.achieved_value = trajectory_value(drilled_, t, value_);
    const PolicyTable best = solve_realization(grid_, t, value_, 1.0, config_.start_bit());
    m.theoretical_max = best.root_value();
    m.defined = m.theoretical_max > 0.0;
    m.relative = m.defined ? 100.0 * m.achieved_value / m.theoretical_max : std::numeric_limits<double>::quiet_NaN();
    m.landed_layer = landing_layer(t, drilled_, &m.stands_in_target);
    m.optimal_layer = landing_layer(t, optimal_trajectory(best));
    m.landing_optimal = m.landed_layer == m.optimal_layer;
    return m;
}

SteeringSession replay_session(const SessionConfig& config, const std::vector<Mutation>& mutations) {
    SteeringSession session(config);
    for (const auto& m : mutations) {
        if (m.kind == Mutation::Kind::weights) {
            session.set_weights(m.weights);
        } else {
            session.step(m.decision);
        }
    }
    return session;
}

const char* to_string(SessionStatus s) noexcept {
    switch (s) {
    case SessionStatus::drilling: return "DRILLING";
    case SessionStatus::stopped: return "STOPPED";
    case SessionStatus::completed: return "COMPLETED";
    }
    return "?";
}

const char* to_string(LandedLayer l) noexcept {
    switch (l) {
    case LandedLayer::none: return "none";
    case LandedLayer::top: return "top";
    case LandedLayer::bottom: return "bottom";
    }
    return "?";
}

const char* to_string(Action a) noexcept { return a == Action::steer ? "steer" : "stop"; }

} // namespace geodss
