/**
 * @file enkf.hpp
 * @brief Perturbed-observation ensemble Kalman filter on boundary depths.
 *
 * The state of a member is its boundary depths stacked boundary-major
 * (row b * knot_count + k). Resistivities are known and not updated.
 */
#pragma once

#include "geodss/em_forward.hpp"
#include "geodss/geomodel.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace geodss {

/// Columns are members.
Eigen::MatrixXd pack_state(const Ensemble& ensemble);

/// Rebuilds members from a state matrix, repairing crossings per knot.
/// Knots, resistivities and weights are taken from `like`.
Ensemble unpack_state(const Ensemble& like, const Eigen::MatrixXd& state);

/// Simulated data, [channel x member].
Eigen::MatrixXd simulate_ensemble(const Ensemble& ensemble, Station station, const ToolSpec& tool);

/// K = C_yd (C_dd + R)^-1 from ensemble anomalies with 1/(n-1) normalization.
/// Returns an exact zero gain when the simulated data have no spread.
/// Throws NumericalError when C_dd + R is not positive definite.
Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& state, const Eigen::MatrixXd& predicted,
                            const Eigen::VectorXd& noise_variance);

/// observed + N(0, noise_variance) per member and channel, [channel x member].
Eigen::MatrixXd perturb_observations(const Eigen::VectorXd& observed, const Eigen::VectorXd& noise_variance,
                                     std::size_t members, std::uint64_t seed);

/// state + K (perturbed - predicted).
Eigen::MatrixXd enkf_update(const Eigen::MatrixXd& state, const Eigen::MatrixXd& predicted,
                            const Eigen::MatrixXd& perturbed, const Eigen::MatrixXd& gain);

struct AssimilationDiagnostics {
    Station station;
    double rms_before = 0.0;
    double rms_after = 0.0;
    double gain_frobenius = 0.0;
};

struct AssimilationResult {
    Ensemble ensemble;
    AssimilationDiagnostics diagnostics;
};

/// One analysis step at `station`. Weights are carried over unchanged.
AssimilationResult assimilate_with_diagnostics(const Ensemble& ensemble, Station station,
                                               const MeasurementVector& observed, const ToolSpec& tool,
                                               std::uint64_t seed);

Ensemble assimilate(const Ensemble& ensemble, Station station, const MeasurementVector& observed,
                    const ToolSpec& tool, std::uint64_t seed);

struct InnovationStats {
    double rms_before = 0.0;
    double rms_after = 0.0;
};

/// RMS of (observed - simulated) over members and channels.
double innovation_rms(const Ensemble& ensemble, Station station, const MeasurementVector& observed,
                      const ToolSpec& tool);

InnovationStats innovation_stats(const Ensemble& before, const Ensemble& after, Station station,
                                 const MeasurementVector& observed, const ToolSpec& tool);

} // namespace geodss
