/**
 * @file objectives.hpp
 * @brief Drilling constraints and the weighted value of trajectory segments.
 *
 * Values are in units of "meters of one-meter-thick reference sand drilled":
 * one horizontal stand in a 1 m sand outside the sweet spot is worth 1.
 */
#pragma once

#include "geodss/geomodel.hpp"

#include <functional>
#include <string>
#include <vector>

namespace geodss {

/// Horizontal length of one stand; also the objective normalization.
inline constexpr double kStandLength = 28.56;
inline constexpr double kDrillingCostPerMeter = 0.003;
inline constexpr double kSweetSpotTop = 0.75;
inline constexpr double kSweetSpotBottom = 2.25;
/// Sand value per meter for the top sand; the next sand down earns twice as much.
inline constexpr double kSandValueStep = 7.0;

struct Point {
    double x = 0.0;
    double z = 0.0;

    bool operator==(const Point&) const = default;
};

struct Segment {
    Point start;
    Point end;

    double dx() const noexcept { return end.x - start.x; }
    double drop() const noexcept { return start.z - end.z; }
    double length() const;
};

struct ObjectiveWeights {
    double w_position = 1.0;
    double w_sand = 0.0;
    double w_cost = 1.0;

    static ObjectiveWeights primary() { return {1.0, 0.0, 1.0}; }
    static ObjectiveWeights alternative() { return {0.3, 0.7, 1.0}; }

    void validate() const;
    bool operator==(const ObjectiveWeights&) const = default;
};

struct Constraints {
    double max_dogleg = 2.0;        // degrees per stand
    double max_inclination = 90.0;  // degrees

    void validate() const;
    bool operator==(const Constraints&) const = default;
};

/// Comparison slack for angle constraints (degrees).
inline constexpr double kAngleTolerance = 1e-9;

/// Angle from vertical in degrees; 90 for a flat segment. Throws
/// ConstraintViolation("non_climbing") when the segment climbs.
double inclination(const Segment& segment);

/// False for climbing segments.
bool dogleg_ok(double prev_inclination, const Segment& segment, const Constraints& constraints);

struct QuadratureSettings {
    /// Uniform midpoint cells per segment before refinement. Cells are
    /// further split at knots, boundary crossings and sweet-spot edges so
    /// the integrand is linear on every cell.
    int base_cells = 16;

    bool operator==(const QuadratureSettings&) const = default;
};

struct SegmentTerms {
    double position = 0.0;
    double sand = 0.0;
    double cost = 0.0;
};

/// O_p, O_s and O_d of one segment. Throws DomainError if the segment leaves
/// the model extent.
SegmentTerms segment_terms(const Segment& segment, const EarthRealization& model,
                           const QuadratureSettings& quadrature = {});

double position_value(const Segment& segment, const EarthRealization& model,
                      const QuadratureSettings& quadrature = {});
double sand_value(const Segment& segment, const EarthRealization& model,
                  const QuadratureSettings& quadrature = {});
double drilling_cost(const Segment& segment);

double combine(const SegmentTerms& terms, const ObjectiveWeights& weights) noexcept;

double segment_value(const Segment& segment, const EarthRealization& model, const ObjectiveWeights& weights,
                     const QuadratureSettings& quadrature = {});

/// Weighted objective set: the three built-in terms plus any registered
/// (segment, model) -> units functions.
class ValueFunction {
public:
    using Objective = std::function<double(const Segment&, const EarthRealization&)>;

    ValueFunction() = default;
    explicit ValueFunction(ObjectiveWeights weights, QuadratureSettings quadrature = {});

    const ObjectiveWeights& weights() const noexcept { return weights_; }
    const QuadratureSettings& quadrature() const noexcept { return quadrature_; }
    void set_weights(const ObjectiveWeights& weights);

    void add_objective(std::string name, double weight, Objective objective);
    std::size_t extra_objective_count() const noexcept { return extras_.size(); }

    double operator()(const Segment& segment, const EarthRealization& model) const;

private:
    struct Extra {
        std::string name;
        double weight = 0.0;
        Objective fn;
    };

    ObjectiveWeights weights_;
    QuadratureSettings quadrature_;
    std::vector<Extra> extras_;
};

} // namespace geodss
