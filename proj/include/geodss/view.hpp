/**
 * @file view.hpp
 * @brief Display data derived from a session: point cloud, value CDF and
 * the full state view served to clients.
 */
#pragma once

#include "geodss/io.hpp"
#include "geodss/steering.hpp"

#include <cstdint>
#include <vector>

namespace geodss {

struct PointCloud {
    std::size_t nx = 0;
    std::size_t nz = 0;
    Point origin;  // lower-left corner of cell (0, 0)
    double dx = 2.0;
    double dz = 0.25;
    /// Row-major, row = depth cell from the bottom: values[iz * nx + ix].
    std::vector<double> values;

    Point cell_center(std::size_t ix, std::size_t iz) const noexcept {
        return {origin.x + (static_cast<double>(ix) + 0.5) * dx, origin.z + (static_cast<double>(iz) + 0.5) * dz};
    }
};

/// Per-cell average of member resistivities at the cell centers.
PointCloud ensemble_pointcloud(const Ensemble& ensemble, double x_min, double x_max, double z_min, double z_max,
                               double dx = 2.0, double dz = 0.25);

/// Pointcloud over the session's decision grid.
PointCloud session_pointcloud(const SteeringSession& session);

struct ValueCdf {
    /// Per member: value drilled so far plus the member's value of the
    /// recommended action, sorted ascending.
    std::vector<double> values;
    /// Weighted mean of the unsorted totals.
    double mean = 0.0;
};

ValueCdf value_cdf(const SteeringSession& session);

json to_json_value(const PointCloud& cloud);

/// StateView: version, bit, drilled, recommendation, weights, per-realization
/// trajectories and values, value_cdf, pointcloud, realization_count, status
/// and (for finished sessions with a truth) metrics.
json state_view(const SteeringSession& session, std::uint64_t version);

} // namespace geodss
