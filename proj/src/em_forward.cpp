#include "geodss/em_forward.hpp"

#include "geodss/errors.hpp"
#include "geodss/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace geodss {

void ToolSpec::validate() const {
    if (!(std::isfinite(doi) && doi > 0.0)) throw ArgumentError("tool doi must be > 0");
    if (!(std::isfinite(noise_variance) && noise_variance >= 0.0))
        throw ArgumentError("tool noise_variance must be >= 0");
    if (channels.empty()) throw ArgumentError("tool needs at least one channel");
}

double kernel_mass(double s, double doi) noexcept {
    if (s <= 0.0) return 0.0;
    if (s >= doi) return 1.0;
    return s * (2.0 * doi - s) / (doi * doi);
}

namespace {

double channel_value(std::span<const double> depths, const std::vector<double>& rho, double z,
                     double doi, ChannelDirection dir) {
    const double sign = dir == ChannelDirection::up ? 1.0 : -1.0;
    // Distances along the channel at which a boundary is crossed.
    double cuts[34];
    std::size_t n = 0;
    cuts[n++] = 0.0;
    for (double d : depths) {
        const double s = sign * (d - z);
        if (s > 0.0 && s < doi && n < 33) cuts[n++] = s;
    }
    std::sort(cuts + 1, cuts + n);
    cuts[n++] = doi;

    double value = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
        const double a = cuts[p];
        const double b = cuts[p + 1];
        if (b <= a) continue;
        const double mid = 0.5 * (a + b);
        value += rho[layer_index(depths, z + sign * mid)] * (kernel_mass(b, doi) - kernel_mass(a, doi));
    }
    return value;
}

} // namespace

MeasurementVector simulate(const EarthRealization& model, Station station, const ToolSpec& tool) {
    if (!model.contains_x(station.x)) {
        throw DomainError("station x = " + std::to_string(station.x) + " outside model extent");
    }
    if (model.boundary_count() > 32) throw ArgumentError("simulate supports at most 32 boundaries");
    double buf[32];
    const std::span<double> depths(buf, model.boundary_count());
    model.boundaries_at(station.x, depths);

    MeasurementVector out;
    out.station = station;
    out.values.reserve(tool.channels.size());
    for (const auto& ch : tool.channels)
        out.values.push_back(channel_value(depths, model.layer_resistivities(), station.z, tool.doi, ch.direction));
    return out;
}

MeasurementVector observe(const EarthRealization& truth, Station station, const ToolSpec& tool,
                          std::uint64_t seed) {
    MeasurementVector out = simulate(truth, station, tool);
    if (tool.noise_variance == 0.0) return out;
    Rng rng(seed);
    const double sd = std::sqrt(tool.noise_variance);
    for (double& v : out.values) v += sd * rng.normal();
    return out;
}

void write_measurements_csv(std::ostream& out, const std::vector<MeasurementVector>& log,
                            const ToolSpec& tool) {
    std::ptrdiff_t up = -1;
    std::ptrdiff_t down = -1;
    for (std::size_t c = 0; c < tool.channels.size(); ++c) {
        if (tool.channels[c].direction == ChannelDirection::up && up < 0) up = static_cast<std::ptrdiff_t>(c);
        if (tool.channels[c].direction == ChannelDirection::down && down < 0) down = static_cast<std::ptrdiff_t>(c);
    }
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "x,z,channel_up,channel_down\n";
    for (const auto& m : log) {
        out << num(m.station.x) << ',' << num(m.station.z) << ',';
        if (up >= 0 && static_cast<std::size_t>(up) < m.values.size()) out << num(m.values[up]);
        out << ',';
        if (down >= 0 && static_cast<std::size_t>(down) < m.values.size()) out << num(m.values[down]);
        out << '\n';
    }
}

} // namespace geodss
