/**
 * @file geomodel.hpp
 * @brief Layer-cake earth models and their geostatistical prior.
 *
 * Depth convention: z in meters, positive upward, with the expected
 * reservoir top at z = 0. Boundaries are indexed top-down, layers are
 * indexed top-down with layer 0 above boundary 0. Layers alternate
 * shale / sand / shale / ..., so odd layer indices are reservoir sands.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace geodss {

/// Minimum layer thickness enforced by crossing repair (m).
inline constexpr double kMinLayerThickness = 0.01;

struct Interval {
    double min = 0.0;
    double max = 0.0;

    bool operator==(const Interval&) const = default;
};

struct GeostatParams {
    std::vector<double> boundary_means{0.0, -5.3, -13.3, -20.1};
    double sill = 2.5;      // m^2
    double range = 350.0;   // m, effective range of exp(-3h/range)
    double nugget = 0.0;    // m^2
    double adjacent_correlation = 0.7;
    double knot_spacing = 28.56;
    Interval x_extent{-50.0, 420.0};
    std::vector<double> layer_resistivities{10.0, 150.0, 10.0, 250.0, 10.0};

    void validate() const;

    /// Knot abscissas: multiples of knot_spacing (anchored at x = 0) from the
    /// last one at or below x_extent.min to the first one at or above
    /// x_extent.max, so knots line up with decision points.
    std::vector<double> knot_grid() const;

    bool operator==(const GeostatParams&) const = default;
};

class EarthRealization {
public:
    EarthRealization() = default;

    /// boundary_depths[b][k] is the depth of boundary b at knots_x[k].
    /// Throws ArgumentError unless knots are strictly increasing and depths
    /// are strictly decreasing down the boundary index at every knot.
    EarthRealization(std::vector<double> knots_x,
                     const std::vector<std::vector<double>>& boundary_depths,
                     std::vector<double> layer_resistivities);

    const std::vector<double>& knots_x() const noexcept { return knots_x_; }
    const std::vector<double>& layer_resistivities() const noexcept { return resistivities_; }

    std::size_t knot_count() const noexcept { return knots_x_.size(); }
    std::size_t boundary_count() const noexcept { return boundary_count_; }
    std::size_t layer_count() const noexcept { return boundary_count_ + 1; }

    double x_min() const noexcept { return knots_x_.front(); }
    double x_max() const noexcept { return knots_x_.back(); }
    bool contains_x(double x) const noexcept { return x >= x_min() && x <= x_max(); }

    /// Depth of boundary b at knot k.
    double depth(std::size_t b, std::size_t k) const noexcept { return depths_[b * knot_count() + k]; }

    /// Depths of boundary b at all knots.
    std::span<const double> boundary(std::size_t b) const noexcept {
        return {depths_.data() + b * knot_count(), knot_count()};
    }

    std::vector<std::vector<double>> boundary_depths() const;

    /// Index k of the knot interval [knots_x[k], knots_x[k+1]] containing x.
    /// Throws DomainError outside the extent.
    std::size_t knot_interval(double x) const;

    /// Piecewise-linear boundary depths at x; out.size() == boundary_count().
    void boundaries_at(double x, std::span<double> out) const;

    std::vector<double> boundaries_at(double x) const;

    bool operator==(const EarthRealization&) const = default;

private:
    std::vector<double> knots_x_;
    std::vector<double> depths_;  // row-major [boundary][knot]
    std::vector<double> resistivities_;
    std::size_t boundary_count_ = 0;
};

/// Weighted set of realizations sharing knots and layer resistivities.
class Ensemble {
public:
    Ensemble() = default;

    /// Uniform weights 1/n.
    explicit Ensemble(std::vector<EarthRealization> members);

    /// Weights must be non-negative with a positive sum; they are normalized.
    Ensemble(std::vector<EarthRealization> members, std::vector<double> weights);

    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }

    const std::vector<EarthRealization>& members() const noexcept { return members_; }
    const EarthRealization& operator[](std::size_t j) const noexcept { return members_[j]; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    bool operator==(const Ensemble&) const = default;

private:
    std::vector<EarthRealization> members_;
    std::vector<double> weights_;
};

struct LayerInfo {
    std::size_t layer = 0;
    /// Thickness of the containing layer at x; infinite for the unbounded
    /// top and bottom layers.
    double thickness = 0.0;
    /// Distance below the roof of the containing layer (0 in the top layer).
    double depth_below_roof = 0.0;
    bool in_reservoir = false;
    /// 0 for the top sand, 1 for the next one down, ...; only meaningful
    /// when in_reservoir.
    std::size_t sand_ordinal = 0;
};

constexpr bool is_reservoir_layer(std::size_t layer) noexcept { return layer % 2 == 1; }

/// Layer containing z given boundary depths sorted top-down. A point exactly
/// on a boundary belongs to the layer below it.
std::size_t layer_index(std::span<const double> boundary_depths, double z) noexcept;

double resistivity_at(const EarthRealization& model, double x, double z);

LayerInfo layer_query(const EarthRealization& model, double x, double z);

/// Boundaries equal to the means at every knot.
EarthRealization mean_model(const GeostatParams& params);

/// Sorts depths descending and separates them to kMinLayerThickness while
/// preserving their mean (isotonic regression on depth + index*thickness).
/// Leaves the input bit-identical when it already satisfies the invariant.
void repair_crossings(std::span<double> depths, double min_thickness = kMinLayerThickness);

/// Applies repair_crossings at every knot.
EarthRealization repaired(const EarthRealization& model);

/// Prior ensemble: boundary_means + Gaussian perturbation with covariance
/// C_b (x) C_x, where C_x(h) = sill*exp(-3h/range) + nugget*[h == 0] and
/// C_b = adjacent_correlation^|b-b'|. Member j draws from its own seed
/// stream, so results do not depend on thread scheduling.
Ensemble generate_ensemble(const GeostatParams& params, std::size_t n, std::uint64_t seed);

/// Same sampler as generate_ensemble, on an independent seed stream.
EarthRealization generate_truth(const GeostatParams& params, std::uint64_t seed);

} // namespace geodss
