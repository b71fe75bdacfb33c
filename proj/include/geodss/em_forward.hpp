/**
 * @file em_forward.hpp
 * @brief Synthetic look-around resistivity tool.
 *
 * Each channel is a vertical average of resistivity above (up) or below
 * (down) the tool, weighted by the triangular kernel
 * w(s) = 2(doi - s)/doi^2 on [0, doi].
 */
#pragma once

#include "geodss/geomodel.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace geodss {

enum class ChannelDirection { up, down };

struct ChannelSpec {
    ChannelDirection direction = ChannelDirection::up;

    bool operator==(const ChannelSpec&) const = default;
};

struct ToolSpec {
    double doi = 5.0;
    std::vector<ChannelSpec> channels{{ChannelDirection::up}, {ChannelDirection::down}};
    double noise_variance = 0.5;

    void validate() const;
    std::size_t channel_count() const noexcept { return channels.size(); }

    bool operator==(const ToolSpec&) const = default;
};

struct Station {
    double x = 0.0;
    double z = 0.0;

    bool operator==(const Station&) const = default;
};

struct MeasurementVector {
    Station station;
    std::vector<double> values;  // one per ToolSpec channel

    bool operator==(const MeasurementVector&) const = default;
};

/// Integral of the kernel over [0, s], clamped to [0, 1].
double kernel_mass(double s, double doi) noexcept;

/// Noise-free channel readings. The integral is split at every boundary
/// crossing inside the kernel support, so it is exact for the piecewise
/// constant resistivity profile. Throws DomainError outside the model extent.
MeasurementVector simulate(const EarthRealization& model, Station station, const ToolSpec& tool);

/// simulate() plus N(0, noise_variance) per channel drawn from `seed`.
MeasurementVector observe(const EarthRealization& truth, Station station, const ToolSpec& tool,
                          std::uint64_t seed);

/// CSV with columns x,z,channel_up,channel_down. Channels the tool does not
/// have are left empty.
void write_measurements_csv(std::ostream& out, const std::vector<MeasurementVector>& log,
                            const ToolSpec& tool);

} // namespace geodss
