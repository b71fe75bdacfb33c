#include "geodss/view.hpp"

#include "geodss/errors.hpp"
#include "geodss/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace geodss {

PointCloud ensemble_pointcloud(const Ensemble& ensemble, double x_min, double x_max, double z_min, double z_max,
                               double dx, double dz) {
    if (ensemble.empty()) throw ArgumentError("pointcloud needs a non-empty ensemble");
    if (!(dx > 0.0 && dz > 0.0 && x_max > x_min && z_max > z_min)) throw ArgumentError("invalid pointcloud raster");
    PointCloud cloud;
    cloud.dx = dx;
    cloud.dz = dz;
    cloud.origin = {x_min, z_min};
    cloud.nx = static_cast<std::size_t>(std::ceil((x_max - x_min) / dx - 1e-9));
    cloud.nz = static_cast<std::size_t>(std::ceil((z_max - z_min) / dz - 1e-9));
    cloud.values.assign(cloud.nx * cloud.nz, 0.0);

    const double n = static_cast<double>(ensemble.size());
    parallel_for(cloud.nx, [&](std::size_t ix) {
        std::vector<double> depths(ensemble[0].boundary_count());
        std::vector<double> sum(cloud.nz, 0.0);
        const double x = std::min(cloud.cell_center(ix, 0).x, ensemble[0].x_max());
        for (const auto& m : ensemble.members()) {
            m.boundaries_at(x, depths);
            const auto& rho = m.layer_resistivities();
            for (std::size_t iz = 0; iz < cloud.nz; ++iz)
                sum[iz] += rho[layer_index(depths, cloud.cell_center(ix, iz).z)];
        }
        for (std::size_t iz = 0; iz < cloud.nz; ++iz) cloud.values[iz * cloud.nx + ix] = sum[iz] / n;
    });
    return cloud;
}

PointCloud session_pointcloud(const SteeringSession& session) {
    const auto& g = session.grid();
    return ensemble_pointcloud(session.ensemble(), g.x(0), g.x(g.steps), g.z_min, g.z_max);
}

ValueCdf value_cdf(const SteeringSession& session) {
    const auto drilled = session.drilled_value_by_member();
    const auto& per = session.recommendation().per_realization;
    const auto& psi = session.ensemble().weights();
    ValueCdf cdf;
    cdf.values.resize(drilled.size());
    for (std::size_t j = 0; j < drilled.size(); ++j) {
        const double future = j < per.size() ? per[j].predicted_value : 0.0;
        cdf.values[j] = drilled[j] + future;
        cdf.mean += psi[j] * cdf.values[j];
    }
    std::sort(cdf.values.begin(), cdf.values.end());
    return cdf;
}

json to_json_value(const PointCloud& cloud) {
    return json{{"nx", cloud.nx},
                {"nz", cloud.nz},
                {"origin", json{{"x", cloud.origin.x}, {"z", cloud.origin.z}}},
                {"spacing", json{{"x", cloud.dx}, {"z", cloud.dz}}},
                {"values", cloud.values}};
}

json state_view(const SteeringSession& session, std::uint64_t version) {
    const auto& bit = session.bit();
    const auto& g = session.grid();
    const auto& rec = session.recommendation();

    json per = json::array();
    for (const auto& r : rec.per_realization)
        per.push_back({{"trajectory", trajectory_json(r.trajectory)},
                       {"predicted_value", r.predicted_value},
                       {"optimal_value", r.optimal_value},
                       {"optimal_trajectory", trajectory_json(r.optimal_trajectory)}});

    const ValueCdf cdf = value_cdf(session);
    json view{{"version", version},
              {"bit", {{"x", g.x(bit.k)}, {"z", g.z(bit.z_index)}, {"inclination", bit.inclination}}},
              {"drilled", trajectory_json(session.drilled())},
              {"recommendation", rec},
              {"weights", session.weights()},
              {"gamma", session.config().gamma},
              {"per_realization", std::move(per)},
              {"value_cdf", cdf.values},
              {"value_cdf_mean", cdf.mean},
              {"pointcloud", to_json_value(session_pointcloud(session))},
              {"realization_count", session.ensemble().size()},
              {"status", to_string(session.status())},
              {"step", session.history().size()},
              {"grid", {{"x0", g.x0}, {"dx", g.dx}, {"steps", g.steps}, {"z_min", g.z_min}, {"z_max", g.z_max}, {"dz", g.dz}}}};
    if (session.status() != SessionStatus::drilling && session.has_truth()) {
        view["metrics"] = session.evaluate_case();
    } else {
        view["metrics"] = nullptr;
    }
    return view;
}

} // namespace geodss
