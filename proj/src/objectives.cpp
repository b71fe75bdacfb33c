#include "geodss/objectives.hpp"

#include "geodss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace geodss {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr std::size_t kMaxBoundaries = 32;

bool finite_non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

/// Accumulates the position and sand integrands over one stretch where the
/// boundary depths are linear in x. ua/ub hold z - d_b at the stretch ends.
void integrate_linear(const double* ua, const double* ub, std::size_t nb, double t0, double t1,
                      double x_length, int base_cells, double& position, double& sand) {
    // Breakpoints in [t0, t1]: uniform cells of the whole segment, plus
    // crossings of the well with each boundary and with each sweet-spot edge.
    double cuts[kMaxBoundaries * 3 + 256];
    std::size_t n = 0;
    cuts[n++] = t0;
    const int cells = std::clamp(base_cells, 1, 250);
    for (int c = 1; c < cells; ++c) {
        const double t = static_cast<double>(c) / cells;
        if (t > t0 && t < t1) cuts[n++] = t;
    }
    static constexpr double levels[3] = {0.0, -kSweetSpotTop, -kSweetSpotBottom};
    for (std::size_t b = 0; b < nb; ++b) {
        const double du = ub[b] - ua[b];
        if (du == 0.0) continue;
        for (double level : levels) {
            const double f = (level - ua[b]) / du;
            if (f > 0.0 && f < 1.0) {
                const double t = t0 + f * (t1 - t0);
                if (t > t0 && t < t1) cuts[n++] = t;
            }
        }
    }
    std::sort(cuts + 1, cuts + n);
    cuts[n++] = t1;

    const double span = t1 - t0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
        const double a = cuts[p];
        const double b = cuts[p + 1];
        if (b <= a) continue;
        const double f = (0.5 * (a + b) - t0) / span;
        std::size_t layer = 0;
        while (layer < nb && ua[layer] + f * (ub[layer] - ua[layer]) <= 0.0) ++layer;
        if (layer == 0 || layer >= nb || !is_reservoir_layer(layer)) continue;
        const double u_roof = ua[layer - 1] + f * (ub[layer - 1] - ua[layer - 1]);
        const double u_floor = ua[layer] + f * (ub[layer] - ua[layer]);
        const double h = u_floor - u_roof;
        const double z_roof = -u_roof;
        const bool sweet = z_roof >= kSweetSpotTop && z_roof <= kSweetSpotBottom;
        const double width = (b - a) * x_length;
        position += (sweet ? 2.0 * h : h) * width;
        sand += kSandValueStep * static_cast<double>(layer / 2 + 1) * width;
    }
}

} // namespace

double Segment::length() const { return std::hypot(dx(), drop()); }

void ObjectiveWeights::validate() const {
    if (!finite_non_negative(w_position) || !finite_non_negative(w_sand) || !finite_non_negative(w_cost))
        throw ArgumentError("objective weights must be finite and >= 0");
}

void Constraints::validate() const {
    if (!(std::isfinite(max_dogleg) && max_dogleg > 0.0)) throw ArgumentError("max_dogleg must be > 0");
    if (!(std::isfinite(max_inclination) && max_inclination > 0.0))
        throw ArgumentError("max_inclination must be > 0");
}

double inclination(const Segment& segment) {
    const double drop = segment.drop();
    if (drop < 0.0) throw ConstraintViolation("non_climbing", "segment climbs; inclination would exceed 90 degrees");
    if (drop == 0.0) return 90.0;
    return std::atan(segment.dx() / drop) * kRadToDeg;
}

bool dogleg_ok(double prev_inclination, const Segment& segment, const Constraints& constraints) {
    if (segment.drop() < 0.0) return false;
    const double a = inclination(segment);
    return std::abs(a - prev_inclination) <= constraints.max_dogleg + kAngleTolerance &&
           a <= constraints.max_inclination + kAngleTolerance;
}

SegmentTerms segment_terms(const Segment& segment, const EarthRealization& model,
                           const QuadratureSettings& quadrature) {
    SegmentTerms terms;
    terms.cost = drilling_cost(segment);
    const double x0 = segment.start.x;
    const double x1 = segment.end.x;
    if (!model.contains_x(x0) || !model.contains_x(x1))
        throw DomainError("segment leaves the model extent");
    const double length = x1 - x0;
    if (length <= 0.0) return terms;

    const std::size_t nb = model.boundary_count();
    if (nb > kMaxBoundaries) throw ArgumentError("segment_terms supports at most 32 boundaries");
    const auto& knots = model.knots_x();

    double da[kMaxBoundaries], db[kMaxBoundaries], ua[kMaxBoundaries], ub[kMaxBoundaries];
    double position = 0.0;
    double sand = 0.0;
    double t0 = 0.0;
    model.boundaries_at(x0, std::span<double>(da, nb));
    auto it = std::upper_bound(knots.begin(), knots.end(), x0);
    for (;;) {
        const bool last = it == knots.end() || *it >= x1;
        const double xb = last ? x1 : *it;
        const double t1 = last ? 1.0 : (xb - x0) / length;
        model.boundaries_at(xb, std::span<double>(db, nb));
        const double za = segment.start.z + t0 * (segment.end.z - segment.start.z);
        const double zb = last ? segment.end.z : segment.start.z + t1 * (segment.end.z - segment.start.z);
        for (std::size_t b = 0; b < nb; ++b) {
            ua[b] = za - da[b];
            ub[b] = zb - db[b];
        }
        integrate_linear(ua, ub, nb, t0, t1, length, quadrature.base_cells, position, sand);
        if (last) break;
        std::copy(db, db + nb, da);
        t0 = t1;
        ++it;
    }
    terms.position = position / kStandLength;
    terms.sand = sand / kStandLength;
    return terms;
}

double position_value(const Segment& segment, const EarthRealization& model, const QuadratureSettings& quadrature) {
    return segment_terms(segment, model, quadrature).position;
}

double sand_value(const Segment& segment, const EarthRealization& model, const QuadratureSettings& quadrature) {
    return segment_terms(segment, model, quadrature).sand;
}

double drilling_cost(const Segment& segment) { return -kDrillingCostPerMeter * segment.length(); }

double combine(const SegmentTerms& terms, const ObjectiveWeights& weights) noexcept {
    return weights.w_position * terms.position + weights.w_sand * terms.sand + weights.w_cost * terms.cost;
}

double segment_value(const Segment& segment, const EarthRealization& model, const ObjectiveWeights& weights,
                     const QuadratureSettings& quadrature) {
    return combine(segment_terms(segment, model, quadrature), weights);
}

ValueFunction::ValueFunction(ObjectiveWeights weights, QuadratureSettings quadrature)
    : weights_(weights), quadrature_(quadrature) {
    weights_.validate();
}

void ValueFunction::set_weights(const ObjectiveWeights& weights) {
    weights.validate();
    weights_ = weights;
}

void ValueFunction::add_objective(std::string name, double weight, Objective objective) {
    if (!finite_non_negative(weight)) throw ArgumentError("objective weights must be finite and >= 0");
    if (!objective) throw ArgumentError("objective function is empty");
    extras_.push_back({std::move(name), weight, std::move(objective)});
}

double ValueFunction::operator()(const Segment& segment, const EarthRealization& model) const {
    double value = segment_value(segment, model, weights_, quadrature_);
    for (const auto& e : extras_) value += e.weight * e.fn(segment, model);
    return value;
}

} // namespace geodss
