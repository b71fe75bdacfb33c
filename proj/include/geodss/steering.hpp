/**
 * @file steering.hpp
 * @brief Closed-loop steering sessions: measure, assimilate, optimize, drill.
 *
 * The synthetic truth is only reachable from the decision path through a
 * MeasurementSource, which hands out noisy readings at the bit.
 */
#pragma once

#include "geodss/em_forward.hpp"
#include "geodss/enkf.hpp"
#include "geodss/geomodel.hpp"
#include "geodss/objectives.hpp"
#include "geodss/optimizer.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace geodss {

struct Seeds {
    std::uint64_t ensemble = 1;
    std::uint64_t truth = 2;
    std::uint64_t noise = 3;

    bool operator==(const Seeds&) const = default;
};

struct SessionConfig {
    GeostatParams geostat;
    ToolSpec tool;
    ObjectiveWeights weights = ObjectiveWeights::primary();
    Constraints constraints;
    double gamma = 1.0;
    std::size_t ensemble_size = 100;
    double horizontal_length = 350.0;
    double start_height = 15.0;
    double start_inclination = 80.0;
    Seeds seeds;
    /// Uniform cells per stand in the objective quadrature. Cells are split
    /// at every breakpoint of the integrand, so this only affects speed.
    QuadratureSettings quadrature{1};
    /// Assimilate each measurement; false steers on the prior alone.
    bool assimilate = true;
    /// Ensemble made of ensemble_size copies of the truth.
    bool perfect_information = false;
    /// Use this truth instead of sampling one from seeds.truth.
    std::optional<EarthRealization> truth;

    void validate() const;
    DecisionGrid grid() const;
    BitState start_bit() const;

    bool operator==(const SessionConfig&) const = default;
};

enum class SessionStatus { drilling, stopped, completed };

struct Decision {
    enum class Kind { accept, steer, stop };
    Kind kind = Kind::accept;
    double target_z = 0.0;  // steer only

    static Decision accept() { return {Kind::accept, 0.0}; }
    static Decision stop() { return {Kind::stop, 0.0}; }
    static Decision steer(double z) { return {Kind::steer, z}; }

    bool operator==(const Decision&) const = default;
};

struct StepRecord {
    int step = 0;
    Action action = Action::stop;
    double target_z = 0.0;
    double inclination_deg = 0.0;
    bool human = false;
    std::optional<MeasurementVector> measurement;
    std::optional<AssimilationDiagnostics> diagnostics;
};

/// Recorded mutation, enough to rebuild a session from its config.
struct Mutation {
    enum class Kind { step, weights };
    Kind kind = Kind::step;
    std::optional<Decision> decision;
    ObjectiveWeights weights;
};

class MeasurementSource {
public:
    virtual ~MeasurementSource() = default;
    /// Reading taken at `station` after stand `step` (1-based).
    virtual MeasurementVector measure(int step, Station station) = 0;
};

/// Noisy readings of a known truth; noise for stand s uses
/// derive_seed(noise_seed, s, 0).
class TruthSource final : public MeasurementSource {
public:
    TruthSource(EarthRealization truth, ToolSpec tool, std::uint64_t noise_seed);
    MeasurementVector measure(int step, Station station) override;

private:
    EarthRealization truth_;
    ToolSpec tool_;
    std::uint64_t noise_seed_;
};

/// Plays back a recorded log; throws ArgumentError if asked for a station
/// that was not recorded.
class ReplaySource final : public MeasurementSource {
public:
    explicit ReplaySource(std::vector<MeasurementVector> log);
    MeasurementVector measure(int step, Station station) override;

private:
    std::vector<MeasurementVector> log_;
};

enum class LandedLayer { none, top, bottom };

struct CaseMetrics {
    double achieved_value = 0.0;
    double theoretical_max = 0.0;
    /// 100 * achieved / theoretical_max; NaN when undefined.
    double relative = 0.0;
    bool defined = false;
    LandedLayer landed_layer = LandedLayer::none;
    LandedLayer optimal_layer = LandedLayer::none;
    bool landing_optimal = false;
    int stands_in_target = 0;
};

class SteeringSession {
public:
    /// Samples truth (unless preset) and ensemble from the seeds and computes
    /// the initial recommendation from the prior.
    explicit SteeringSession(SessionConfig config);

    /// Decision path without a truth: measurements come from `source`.
    /// evaluate_case() is unavailable on such sessions.
    SteeringSession(SessionConfig config, std::unique_ptr<MeasurementSource> source);

    SteeringSession(SteeringSession&&) noexcept;
    SteeringSession& operator=(SteeringSession&&) noexcept;
    ~SteeringSession();

    const SessionConfig& config() const noexcept { return config_; }
    const DecisionGrid& grid() const noexcept { return grid_; }
    const ValueFunction& value_function() const noexcept { return value_; }
    const ObjectiveWeights& weights() const noexcept { return value_.weights(); }
    const Ensemble& ensemble() const noexcept { return ensemble_; }
    const BitState& bit() const noexcept { return bit_; }
    const std::vector<Point>& drilled() const noexcept { return drilled_; }
    SessionStatus status() const noexcept { return status_; }
    const Recommendation& recommendation() const noexcept { return recommendation_; }
    const std::vector<StepRecord>& history() const noexcept { return history_; }
    const std::vector<Mutation>& mutations() const noexcept { return mutations_; }
    std::vector<MeasurementVector> measurement_log() const;

    bool has_truth() const noexcept { return truth_.has_value(); }
    /// Throws SessionStateError on truthless sessions. Not used by decisions.
    const EarthRealization& truth() const;

    /// Commits the recommendation or `decision`, drills one stand, measures
    /// at the new bit, assimilates and re-optimizes. Throws
    /// ConstraintViolation for an infeasible steer (state unchanged) and
    /// SessionStateError unless drilling.
    void step(std::optional<Decision> decision = std::nullopt);

    /// Replaces the weights and re-optimizes without moving the bit.
    void set_weights(const ObjectiveWeights& weights);

    /// Value of the drilled trajectory under each member, current weights.
    std::vector<double> drilled_value_by_member() const;

    /// Requires a finished session with a truth.
    CaseMetrics evaluate_case() const;

private:
    void init();
    void recompute();

    SessionConfig config_;
    DecisionGrid grid_;
    ValueFunction value_;
    std::optional<EarthRealization> truth_;
    std::unique_ptr<MeasurementSource> source_;
    Ensemble ensemble_;
    BitState bit_;
    std::vector<Point> drilled_;
    SessionStatus status_ = SessionStatus::drilling;
    Recommendation recommendation_;
    std::vector<StepRecord> history_;
    std::vector<Mutation> mutations_;
};

/// Layer a trajectory lands in: the first sand holding at least two
/// consecutive full stands. A stand is attributed to the layer of its
/// midpoint and is full when both ends are inside that layer too, so stands
/// crossing a sand on the way down do not count. `stands` receives the number
/// of full stands in the landed sand.
LandedLayer landing_layer(const EarthRealization& truth, const std::vector<Point>& trajectory,
                          int* stands = nullptr);

/// Sum of segment values along a trajectory, accumulated from the end.
double trajectory_value(const std::vector<Point>& trajectory, const EarthRealization& model,
                        const ValueFunction& value);

/// Rebuilds a session by replaying mutations on a fresh session.
SteeringSession replay_session(const SessionConfig& config, const std::vector<Mutation>& mutations);

const char* to_string(SessionStatus s) noexcept;
const char* to_string(LandedLayer l) noexcept;
const char* to_string(Action a) noexcept;

} // namespace geodss
