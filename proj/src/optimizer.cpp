#include "geodss/optimizer.hpp"

#include "geodss/errors.hpp"
#include "geodss/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace geodss {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

void check_gamma(double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ArgumentError("discount factor must lie in [0, 1]");
}

} // namespace

void DecisionGrid::validate() const {
    if (!(std::isfinite(dx) && dx > 0.0)) throw ArgumentError("grid dx must be > 0");
    if (!(std::isfinite(dz) && dz > 0.0)) throw ArgumentError("grid dz must be > 0");
    if (steps < 1) throw ArgumentError("grid needs at least one step");
    if (!(z_max > z_min)) throw ArgumentError("grid z range is empty");
    const double cells = (z_max - z_min) / dz;
    if (std::abs(cells - std::round(cells)) > 1e-9) throw ArgumentError("grid z range is not a multiple of dz");
    if (std::round(cells) + 1 > 30000) throw ArgumentError("grid has too many depth nodes");
    constraints.validate();
}

std::size_t DecisionGrid::z_count() const {
    return static_cast<std::size_t>(std::llround((z_max - z_min) / dz)) + 1;
}

std::size_t DecisionGrid::z_index(double z) const {
    const double f = (z - z_min) / dz;
    const double r = std::round(f);
    if (!std::isfinite(f) || std::abs(f - r) * dz > 1e-9 || r < 0.0 || r >= static_cast<double>(z_count())) {
        throw ConstraintViolation("grid_bounds", "depth " + std::to_string(z) + " is not a node of the decision grid");
    }
    return static_cast<std::size_t>(r);
}

double DecisionGrid::drop_inclination(std::size_t d) const noexcept {
    if (d == 0) return 90.0;
    return std::atan(dx / (dz * static_cast<double>(d))) * kRadToDeg;
}

/// Feasible moves and reachable states from one root; independent of the
/// earth model, so it is built once and shared by every member's solve.
class PolicySolver {
public:
    PolicySolver(const DecisionGrid& grid, const BitState& root) : grid_(grid), root_(root) {
        grid.validate();
        nz_ = grid.z_count();
        if (root.k < 0 || root.k > grid.steps) throw ArgumentError("bit decision index outside the grid");
        if (root.z_index >= nz_) throw ArgumentError("bit depth index outside the grid");
        if (!(root.inclination > 0.0 && root.inclination <= 90.0 + kAngleTolerance))
            throw ArgumentError("bit inclination must lie in (0, 90]");
        levels_ = grid.steps - root.k;

        const auto& c = grid.constraints;
        const double floor_angle = root.inclination - c.max_dogleg * levels_ - 1e-6;
        max_drop_ = 0;
        while (static_cast<std::size_t>(max_drop_ + 1) < nz_ &&
               grid.drop_inclination(static_cast<std::size_t>(max_drop_ + 1)) >= floor_angle)
            ++max_drop_;

        alpha_.resize(static_cast<std::size_t>(max_drop_) + 1);
        for (int d = 0; d <= max_drop_; ++d) alpha_[d] = grid.drop_inclination(static_cast<std::size_t>(d));

        lo_.resize(alpha_.size());
        hi_.resize(alpha_.size());
        for (int d = 0; d <= max_drop_; ++d) window(alpha_[d], lo_[d], hi_[d]);
        window(root.inclination, root_lo_, root_hi_);
        root_hi_ = std::min(root_hi_, static_cast<int>(root.z_index));

        // Forward reachability.
        reach_.assign(static_cast<std::size_t>(levels_) * nz_ * alpha_.size(), 0);
        if (levels_ == 0) return;
        for (int d = root_lo_; d <= root_hi_; ++d)
            reach_[slot(root.k + 1, root.z_index - static_cast<std::size_t>(d), d)] = 1;
        for (int k = root.k + 1; k < grid.steps; ++k) {
            for (std::size_t i = 0; i < nz_; ++i) {
                for (int din = 0; din <= max_drop_; ++din) {
                    if (!reach_[slot(k, i, din)]) continue;
                    const int hi = std::min(hi_[din], static_cast<int>(i));
                    for (int d = lo_[din]; d <= hi; ++d) reach_[slot(k + 1, i - static_cast<std::size_t>(d), d)] = 1;
                }
            }
        }
    }

    PolicyTable solve(const EarthRealization& model, const ValueFunction& value, double gamma) const {
        check_gamma(gamma);
        PolicyTable t;
        t.grid_ = grid_;
        t.root_ = root_;
        t.gamma_ = gamma;
        t.max_drop_ = max_drop_;
        t.values_.assign(reach_.size(), 0.0);
        t.successors_.assign(reach_.size(), static_cast<std::int16_t>(kStop));
        t.solved_.assign(reach_.size(), 0);

        const int nd = max_drop_ + 1;
        std::vector<double> option(static_cast<std::size_t>(nd));

        // Terminal level: nothing left to drill.
        if (levels_ > 0) {
            for (std::size_t i = 0; i < nz_; ++i)
                for (int d = 0; d < nd; ++d) {
                    const std::size_t s = slot(grid_.steps, i, d);
                    if (!reach_[s]) continue;
                    t.solved_[s] = 1;
                    ++t.state_count_;
                    ++t.state_evaluations_;
                }
        }

        for (int k = grid_.steps - 1; k > root_.k; --k) {
            const Point from_x{grid_.x(k), 0.0};
            const double x_next = grid_.x(k + 1);
            for (std::size_t i = 0; i < nz_; ++i) {
                int need_lo = nd;
                int need_hi = -1;
                for (int din = 0; din < nd; ++din) {
                    if (!reach_[slot(k, i, din)]) continue;
                    need_lo = std::min(need_lo, lo_[din]);
                    need_hi = std::max(need_hi, hi_[din]);
                }
                need_hi = std::min(need_hi, static_cast<int>(i));
                if (need_hi < need_lo && need_lo == nd) continue;  // nothing reachable at (k, i)

                for (int d = need_lo; d <= need_hi; ++d) {
                    const std::size_t to = i - static_cast<std::size_t>(d);
                    const Segment seg{{from_x.x, grid_.z(i)}, {x_next, grid_.z(to)}};
                    ++t.segment_evaluations_;
                    option[d] = value(seg, model) + gamma * t.values_[slot(k + 1, to, d)];
                }
                for (int din = 0; din < nd; ++din) {
                    const std::size_t s = slot(k, i, din);
                    if (!reach_[s]) continue;
                    const auto [best, v] = select(option, lo_[din], std::min(hi_[din], static_cast<int>(i)), alpha_[din]);
                    t.values_[s] = v;
                    t.successors_[s] = static_cast<std::int16_t>(best);
                    t.solved_[s] = 1;
                    ++t.state_count_;
                    ++t.state_evaluations_;
                }
            }
        }

        // Root.
        ++t.state_count_;
        ++t.state_evaluations_;
        t.root_lo_ = root_lo_;
        t.root_hi_ = root_hi_;
        if (levels_ > 0 && root_hi_ >= root_lo_) {
            t.root_options_.assign(static_cast<std::size_t>(root_hi_ - root_lo_ + 1), 0.0);
            for (int d = root_lo_; d <= root_hi_; ++d) {
                const std::size_t to = root_.z_index - static_cast<std::size_t>(d);
                const Segment seg{{grid_.x(root_.k), grid_.z(root_.z_index)}, {grid_.x(root_.k + 1), grid_.z(to)}};
                ++t.segment_evaluations_;
                option[d] = value(seg, model) + gamma * t.values_[slot(root_.k + 1, to, d)];
                t.root_options_[static_cast<std::size_t>(d - root_lo_)] = option[d];
            }
            const auto [best, v] = select(option, root_lo_, root_hi_, root_.inclination);
            t.root_value_ = v;
            t.root_successor_ = best;
        } else {
            t.root_lo_ = 0;
            t.root_hi_ = -1;
        }
        return t;
    }

    /// STOP (value 0) unless some option is strictly positive; among equal
    /// options the smallest inclination change wins, then the smallest drop.
    std::pair<int, double> select(const std::vector<double>& option, int lo, int hi, double incoming) const {
        int best = kStop;
        double best_value = 0.0;
        for (int d = lo; d <= hi; ++d) {
            const double v = option[static_cast<std::size_t>(d)];
            if (v > best_value) {
                best = d;
                best_value = v;
            } else if (v == best_value && best != kStop &&
                       std::abs(alpha_[d] - incoming) < std::abs(alpha_[best] - incoming)) {
                best = d;
            }
        }
        return {best, best_value};
    }

    int root_lo() const noexcept { return root_lo_; }
    int root_hi() const noexcept { return levels_ > 0 ? root_hi_ : -1; }
    double alpha(int d) const noexcept { return alpha_[static_cast<std::size_t>(d)]; }

private:
    void window(double incoming, int& lo, int& hi) const {
        const auto& c = grid_.constraints;
        lo = max_drop_ + 1;
        hi = -1;
        for (int d = 0; d <= max_drop_; ++d) {
            const double a = alpha_[d];
            if (std::abs(a - incoming) <= c.max_dogleg + kAngleTolerance && a <= c.max_inclination + kAngleTolerance) {
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
        }
    }

    std::size_t slot(int k, std::size_t i, int d) const noexcept {
        return (static_cast<std::size_t>(k - root_.k - 1) * nz_ + i) * alpha_.size() + static_cast<std::size_t>(d);
    }

    DecisionGrid grid_;
    BitState root_;
    std::size_t nz_ = 0;
    int levels_ = 0;
    int max_drop_ = 0;
    std::vector<double> alpha_;
    std::vector<int> lo_;
    std::vector<int> hi_;
    int root_lo_ = 0;
    int root_hi_ = -1;
    std::vector<std::uint8_t> reach_;
};

std::size_t PolicyTable::slot(int k, std::size_t i, int d) const noexcept {
    return (static_cast<std::size_t>(k - root_.k - 1) * grid_.z_count() + i) * static_cast<std::size_t>(max_drop_ + 1) +
           static_cast<std::size_t>(d);
}

bool PolicyTable::solved(const DPState& s) const noexcept {
    if (s.prev_drop == kRootMarker) return s.k == root_.k && s.z_index == root_.z_index;
    if (s.k <= root_.k || s.k > grid_.steps || s.z_index >= grid_.z_count() || s.prev_drop < 0 ||
        s.prev_drop > max_drop_)
        return false;
    return solved_[slot(s.k, s.z_index, s.prev_drop)] != 0;
}

double PolicyTable::value(const DPState& s) const {
    if (!solved(s)) throw InternalError("policy queried at an unsolved state");
    if (s.prev_drop == kRootMarker) return root_value_;
    return values_[slot(s.k, s.z_index, s.prev_drop)];
}

int PolicyTable::successor(const DPState& s) const {
    if (!solved(s)) throw InternalError("policy queried at an unsolved state");
    if (s.prev_drop == kRootMarker) return root_successor_;
    return successors_[slot(s.k, s.z_index, s.prev_drop)];
}

double PolicyTable::root_option_value(int drop) const {
    if (drop < root_lo_ || drop > root_hi_) throw InternalError("drop is not a feasible move from the root");
    return root_options_[static_cast<std::size_t>(drop - root_lo_)];
}

PolicyTable solve_realization(const DecisionGrid& grid, const EarthRealization& model, const ValueFunction& value,
                              double gamma, const BitState& root) {
    check_gamma(gamma);
    return PolicySolver(grid, root).solve(model, value, gamma);
}

std::vector<Point> optimal_trajectory(const PolicyTable& policy, const DPState& from) {
    const auto& grid = policy.grid();
    DPState s = from;
    std::vector<Point> path{{grid.x(s.k), grid.z(s.z_index)}};
    int next = policy.successor(s);
    while (next != kStop && s.k < grid.steps) {
        s = {s.k + 1, s.z_index - static_cast<std::size_t>(next), next};
        path.push_back({grid.x(s.k), grid.z(s.z_index)});
        next = policy.successor(s);
    }
    return path;
}

std::vector<Point> optimal_trajectory(const PolicyTable& policy) {
    return optimal_trajectory(policy, {policy.root().k, policy.root().z_index, kRootMarker});
}

namespace {

struct MemberOutcome {
    std::vector<double> options;                 // per root drop, lo..hi
    std::vector<std::vector<Point>> follow_ups;  // continuation after each root drop
    double optimal_value = 0.0;
    std::vector<Point> optimal_trajectory;
};

} // namespace

Recommendation robust_decision(const DecisionGrid& grid, const Ensemble& ensemble, const ValueFunction& value,
                               double gamma, const BitState& bit) {
    if (ensemble.empty()) throw ArgumentError("robust_decision needs a non-empty ensemble");
    check_gamma(gamma);
    const PolicySolver solver(grid, bit);
    const int lo = solver.root_lo();
    const int hi = solver.root_hi();

    std::vector<MemberOutcome> outcomes(ensemble.size());
    parallel_for(ensemble.size(), [&](std::size_t j) {
        const PolicyTable table = solver.solve(ensemble[j], value, gamma);
        auto& out = outcomes[j];
        out.optimal_value = table.root_value();
        out.optimal_trajectory = optimal_trajectory(table);
        for (int d = lo; d <= hi; ++d) {
            out.options.push_back(table.root_option_value(d));
            out.follow_ups.push_back(
                optimal_trajectory(table, {bit.k + 1, bit.z_index - static_cast<std::size_t>(d), d}));
        }
    });

    Recommendation rec;
    std::vector<double> expected(static_cast<std::size_t>(std::max(hi + 1, 0)), 0.0);
    const auto& psi = ensemble.weights();
    for (int d = lo; d <= hi; ++d) {
        double e = 0.0;
        for (std::size_t j = 0; j < outcomes.size(); ++j) e += psi[j] * outcomes[j].options[static_cast<std::size_t>(d - lo)];
        expected[static_cast<std::size_t>(d)] = e;
        rec.alternatives.push_back({d, grid.z(bit.z_index - static_cast<std::size_t>(d)), solver.alpha(d), e});
    }
    const auto [best, best_value] = solver.select(expected, lo, hi, bit.inclination);

    const Point here{grid.x(bit.k), grid.z(bit.z_index)};
    rec.expected_value = best_value;
    if (best == kStop) {
        rec.action = Action::stop;
        rec.drop = kStop;
        rec.target_z = here.z;
        rec.inclination_deg = bit.inclination;
    } else {
        rec.action = Action::steer;
        rec.drop = best;
        rec.target_z = grid.z(bit.z_index - static_cast<std::size_t>(best));
        rec.inclination_deg = solver.alpha(best);
    }
    rec.per_realization.reserve(outcomes.size());
    for (auto& out : outcomes) {
        RealizationOutlook view;
        if (best == kStop) {
            view.trajectory = {here};
        } else {
            view.trajectory = {here};
            const auto& follow = out.follow_ups[static_cast<std::size_t>(best - lo)];
            view.trajectory.insert(view.trajectory.end(), follow.begin(), follow.end());
            view.predicted_value = out.options[static_cast<std::size_t>(best - lo)];
        }
        view.optimal_value = out.optimal_value;
        view.optimal_trajectory = std::move(out.optimal_trajectory);
        rec.per_realization.push_back(std::move(view));
    }
    return rec;
}

double theoretical_maximum(const DecisionGrid& grid, const EarthRealization& truth, const ValueFunction& value,
                           const BitState& root) {
    return solve_realization(grid, truth, value, 1.0, root).root_value();
}

} // namespace geodss
