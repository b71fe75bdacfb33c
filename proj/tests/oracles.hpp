// Independent reference implementations used by the tests. None of these
// share code with the library beyond the public model types.
#pragma once

#include "geodss/em_forward.hpp"
#include "geodss/geomodel.hpp"
#include "geodss/objectives.hpp"
#include "geodss/optimizer.hpp"
#include "geodss/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <vector>

namespace oracle {

using namespace geodss;

/// Channel value by plain composite midpoint rule on resistivity_at.
inline double em_channel(const EarthRealization& m, double x, double z, double doi, int sign, int cells = 10000) {
    const double h = doi / cells;
    double sum = 0.0;
    for (int c = 0; c < cells; ++c) {
        const double s = (c + 0.5) * h;
        const double w = 2.0 * (doi - s) / (doi * doi);
        sum += w * resistivity_at(m, x, z + sign * s) * h;
    }
    return sum;
}

inline double inclination_deg(double dx, double drop) {
    if (drop == 0.0) return 90.0;
    return std::atan(dx / drop) * 180.0 / M_PI;
}

/// Exhaustive path enumeration on a decision grid. Segment values are cached
/// by (k, from, to) only; every path is walked explicitly.
class PathEnumerator {
public:
    PathEnumerator(const DecisionGrid& grid, const EarthRealization& model, const ValueFunction& value, double gamma)
        : grid_(grid), model_(model), value_(value), gamma_(gamma) {}

    struct Best {
        double value = 0.0;
        std::vector<std::size_t> path;  // depth indices after the start, empty = stop
    };

    double segment(int k, std::size_t from, std::size_t to) {
        const auto key = std::make_tuple(k, from, to);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const Segment s{{grid_.x(k), grid_.z(from)}, {grid_.x(k + 1), grid_.z(to)}};
        const double v = value_(s, model_);
        cache_.emplace(key, v);
        return v;
    }

    std::vector<std::size_t> moves(std::size_t i, double alpha) const {
        std::vector<std::size_t> out;
        for (std::size_t to = 0; to <= i; ++to) {
            const double a = inclination_deg(grid_.dx, (i - to) * grid_.dz);
            if (std::abs(a - alpha) <= grid_.constraints.max_dogleg + 1e-9 &&
                a <= grid_.constraints.max_inclination + 1e-9)
                out.push_back(to);
        }
        return out;
    }

    /// Best discounted value over every feasible path from (k, i, alpha),
    /// stopping allowed anywhere.
    Best best(int k, std::size_t i, double alpha) {
        Best b;
        if (k >= grid_.steps) return b;
        for (std::size_t to : moves(i, alpha)) {
            const double a = inclination_deg(grid_.dx, (i - to) * grid_.dz);
            Best tail = gamma_ > 0.0 ? best(k + 1, to, a) : Best{};  // gamma 0: the tail is irrelevant
            const double v = segment(k, i, to) + gamma_ * tail.value;
            if (v > b.value) {
                b.value = v;
                b.path.assign(1, to);
                b.path.insert(b.path.end(), tail.path.begin(), tail.path.end());
            }
        }
        return b;
    }

    /// All path values from the root, used to check uniqueness of the optimum.
    void all_values(int k, std::size_t i, double alpha, double acc, double disc, std::vector<double>& out) {
        out.push_back(acc);
        if (k >= grid_.steps) return;
        for (std::size_t to : moves(i, alpha)) {
            const double a = inclination_deg(grid_.dx, (i - to) * grid_.dz);
            all_values(k + 1, to, a, acc + disc * segment(k, i, to), disc * gamma_, out);
        }
    }

private:
    DecisionGrid grid_;
    const EarthRealization& model_;
    const ValueFunction& value_;
    double gamma_;
    std::map<std::tuple<int, std::size_t, std::size_t>, double> cache_;
};

struct RobustChoice {
    bool stop = true;
    std::size_t target = 0;
    double expected = 0.0;
};

/// Expected-value argmax over the immediate moves, by enumeration per member.
/// Ties: stop unless strictly positive, then smallest |inclination change|,
/// then smallest drop.
inline RobustChoice robust_choice(const DecisionGrid& grid, const Ensemble& ens, const ValueFunction& value,
                                  double gamma, const BitState& bit) {
    std::vector<PathEnumerator> en;
    for (std::size_t j = 0; j < ens.size(); ++j) en.emplace_back(grid, ens[j], value, gamma);
    RobustChoice best;
    double best_dalpha = 0.0;
    for (std::size_t to : en[0].moves(bit.z_index, bit.inclination)) {
        const double a = inclination_deg(grid.dx, (bit.z_index - to) * grid.dz);
        double e = 0.0;
        for (std::size_t j = 0; j < ens.size(); ++j)
            e += ens.weights()[j] * (en[j].segment(bit.k, bit.z_index, to) + gamma * en[j].best(bit.k + 1, to, a).value);
        const double da = std::abs(a - bit.inclination);
        const bool better = best.stop ? e > 0.0
                                      : (e > best.expected || (e == best.expected && da < best_dalpha) ||
                                         (e == best.expected && da == best_dalpha && to > best.target));
        if (better) {
            best = {false, to, e};
            best_dalpha = da;
        }
    }
    return best;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

inline DecisionGrid small_grid(int steps, double z_min, std::size_t nz, double dz, double dogleg) {
    DecisionGrid g;
    g.steps = steps;
    g.z_min = z_min;
    g.dz = dz;
    g.z_max = z_min + dz * static_cast<double>(nz - 1);
    g.constraints.max_dogleg = dogleg;
    return g;
}

struct RandomCase {
    DecisionGrid grid;
    BitState root;
    ObjectiveWeights weights;
    double gamma = 1.0;
};

// Small random DP instance: at most 6 steps and 15 depths.
inline RandomCase random_case(Rng& rng) {
    auto pick = [&](int n) { return static_cast<int>(rng.uniform() * n) % n; };
    RandomCase c;
    const int steps = 2 + pick(5);
    const std::size_t nz = 5 + static_cast<std::size_t>(pick(11));
    const double dz = std::vector<double>{0.5, 1.0, 2.0}[static_cast<std::size_t>(pick(3))];
    const double dogleg = std::vector<double>{2.0, 4.0}[static_cast<std::size_t>(pick(2))];
    const double z_min = -8.0 + 6.0 * rng.uniform();
    c.grid = small_grid(steps, std::round(z_min / dz) * dz, nz, dz, dogleg);
    c.root.k = 0;
    c.root.z_index = nz - 1 - static_cast<std::size_t>(pick(3));
    c.root.inclination = std::vector<double>{78.0, 82.0, 86.0, 90.0}[static_cast<std::size_t>(pick(4))];
    const ObjectiveWeights options[3] = {ObjectiveWeights::primary(), ObjectiveWeights::alternative(),
                                         ObjectiveWeights{0.5, 0.3, 2.0}};
    c.weights = options[pick(3)];
    c.gamma = std::vector<double>{1.0, 0.9, 0.5}[static_cast<std::size_t>(pick(3))];
    return c;
}

} // namespace oracle
