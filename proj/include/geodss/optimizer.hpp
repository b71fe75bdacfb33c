/**
 * @file optimizer.hpp
 * @brief Per-realization dynamic programming and the robust one-step decision.
 *
 * Trajectories live on a grid of decision abscissas x_k = x0 + k*dx and
 * depths z_i = z_min + i*dz. A move from (k, i) drops d >= 0 depth cells to
 * (k+1, i-d); the drop of the incoming segment fixes the inclination, so a
 * DP state is (k, i, incoming drop). The state the bit is in is the root and
 * carries its inclination explicitly.
 */
#pragma once

#include "geodss/geomodel.hpp"
#include "geodss/objectives.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace geodss {

struct DecisionGrid {
    double x0 = 0.0;
    double dx = kStandLength;
    int steps = 13;
    double z_min = -30.0;
    double z_max = 16.0;
    double dz = 0.25;
    Constraints constraints;

    void validate() const;

    std::size_t z_count() const;
    double x(int k) const noexcept { return x0 + dx * k; }
    double z(std::size_t i) const noexcept { return z_min + dz * static_cast<double>(i); }

    /// Index of a depth that lies on the grid (within 1e-9 m). Throws
    /// ConstraintViolation("grid_bounds") otherwise.
    std::size_t z_index(double z) const;

    /// Inclination of a stand dropping d depth cells.
    double drop_inclination(std::size_t d) const noexcept;

    bool operator==(const DecisionGrid&) const = default;
};

/// Where the bit is: decision index, depth index and current inclination.
struct BitState {
    int k = 0;
    std::size_t z_index = 0;
    double inclination = 80.0;

    bool operator==(const BitState&) const = default;
};

inline constexpr int kRootMarker = -1;
inline constexpr int kStop = -1;

struct DPState {
    int k = 0;
    std::size_t z_index = 0;
    /// Drop of the incoming segment, or kRootMarker for the root.
    int prev_drop = kRootMarker;

    bool operator==(const DPState&) const = default;
};

/// Memoized values V(state) and successors (a drop, or kStop) for one
/// realization, over the states reachable from one root.
class PolicyTable {
public:
    const DecisionGrid& grid() const noexcept { return grid_; }
    const BitState& root() const noexcept { return root_; }
    double gamma() const noexcept { return gamma_; }

    bool solved(const DPState& s) const noexcept;
    /// Throws InternalError for states that were not solved.
    double value(const DPState& s) const;
    int successor(const DPState& s) const;

    double root_value() const noexcept { return root_value_; }
    int root_successor() const noexcept { return root_successor_; }

    /// Value of committing to `drop` from the root: segment + gamma * V(next).
    /// Throws InternalError for drops outside the root's feasible set.
    double root_option_value(int drop) const;
    int root_min_drop() const noexcept { return root_lo_; }
    int root_max_drop() const noexcept { return root_hi_; }

    std::size_t state_count() const noexcept { return state_count_; }
    std::size_t state_evaluations() const noexcept { return state_evaluations_; }
    std::size_t segment_evaluations() const noexcept { return segment_evaluations_; }

private:
    friend class PolicySolver;

    std::size_t slot(int k, std::size_t i, int d) const noexcept;

    DecisionGrid grid_;
    BitState root_;
    double gamma_ = 1.0;
    int max_drop_ = 0;
    std::vector<double> values_;
    std::vector<std::int16_t> successors_;
    std::vector<std::uint8_t> solved_;
    std::vector<double> root_options_;
    int root_lo_ = 0;
    int root_hi_ = -1;
    double root_value_ = 0.0;
    int root_successor_ = kStop;
    std::size_t state_count_ = 0;
    std::size_t state_evaluations_ = 0;
    std::size_t segment_evaluations_ = 0;
};

/// Backward recursion V(s) = max(0, max_d seg(s, d) + gamma * V(next)).
/// Ties: STOP unless a move is strictly positive; among equal moves the
/// smallest inclination change, then the smallest drop. gamma in [0, 1].
PolicyTable solve_realization(const DecisionGrid& grid, const EarthRealization& model, const ValueFunction& value,
                              double gamma, const BitState& root);

/// Follows successors from `from` until STOP or the last decision point.
std::vector<Point> optimal_trajectory(const PolicyTable& policy, const DPState& from);
std::vector<Point> optimal_trajectory(const PolicyTable& policy);

enum class Action { steer, stop };

struct Alternative {
    int drop = 0;
    double target_z = 0.0;
    double inclination_deg = 0.0;
    double expected_value = 0.0;
};

struct RealizationOutlook {
    /// Chosen first step followed by this member's optimal continuation.
    std::vector<Point> trajectory;
    /// Member's value of the chosen action (0 for STOP).
    double predicted_value = 0.0;
    /// Member's own optimum from the bit, and its trajectory.
    double optimal_value = 0.0;
    std::vector<Point> optimal_trajectory;
};

struct Recommendation {
    Action action = Action::stop;
    int drop = kStop;
    double target_z = 0.0;
    double inclination_deg = 0.0;
    double expected_value = 0.0;
    std::vector<Alternative> alternatives;
    std::vector<RealizationOutlook> per_realization;
};

/// Picks the immediate move (or STOP) maximizing the weighted expectation of
/// segment value + gamma * V_j(next) over members, with the same tie-break
/// as solve_realization.
Recommendation robust_decision(const DecisionGrid& grid, const Ensemble& ensemble, const ValueFunction& value,
                               double gamma, const BitState& bit);

/// V(root) with gamma = 1 on the known model.
double theoretical_maximum(const DecisionGrid& grid, const EarthRealization& truth, const ValueFunction& value,
                           const BitState& root);

} // namespace geodss
