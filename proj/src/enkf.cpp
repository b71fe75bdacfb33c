#include "geodss/enkf.hpp"

#include "geodss/errors.hpp"
#include "geodss/parallel.hpp"
#include "geodss/random.hpp"

#include <cmath>

namespace geodss {

namespace {

double rms_mismatch(const Eigen::MatrixXd& predicted, const std::vector<double>& observed) {
    if (observed.size() != static_cast<std::size_t>(predicted.rows()))
        throw ArgumentError("observation does not match the tool channel count");
    double sum = 0.0;
    for (Eigen::Index j = 0; j < predicted.cols(); ++j)
        for (Eigen::Index c = 0; c < predicted.rows(); ++c) {
            const double e = observed[static_cast<std::size_t>(c)] - predicted(c, j);
            sum += e * e;
        }
    return std::sqrt(sum / static_cast<double>(predicted.size()));
}

} // namespace

Eigen::MatrixXd pack_state(const Ensemble& ensemble) {
    if (ensemble.empty()) throw ArgumentError("cannot pack an empty ensemble");
    const auto& first = ensemble[0];
    const auto rows = static_cast<Eigen::Index>(first.boundary_count() * first.knot_count());
    Eigen::MatrixXd state(rows, static_cast<Eigen::Index>(ensemble.size()));
    for (std::size_t j = 0; j < ensemble.size(); ++j) {
        const auto& m = ensemble[j];
        if (m.boundary_count() != first.boundary_count())
            throw ArgumentError("ensemble members differ in boundary count");
        Eigen::Index r = 0;
        for (std::size_t b = 0; b < m.boundary_count(); ++b)
            for (double d : m.boundary(b)) state(r++, static_cast<Eigen::Index>(j)) = d;
    }
    return state;
}

Ensemble unpack_state(const Ensemble& like, const Eigen::MatrixXd& state) {
    if (like.empty()) throw ArgumentError("cannot unpack into an empty ensemble");
    const auto& first = like[0];
    const std::size_t nb = first.boundary_count();
    const std::size_t nk = first.knot_count();
    if (state.rows() != static_cast<Eigen::Index>(nb * nk) ||
        state.cols() != static_cast<Eigen::Index>(like.size()))
        throw ArgumentError("state matrix does not match the ensemble layout");
    if (!state.allFinite()) throw NumericalError("state matrix contains non-finite values");

    std::vector<EarthRealization> members;
    members.reserve(like.size());
    std::vector<double> column(nb);
    for (Eigen::Index j = 0; j < state.cols(); ++j) {
        std::vector<std::vector<double>> depths(nb, std::vector<double>(nk));
        for (std::size_t k = 0; k < nk; ++k) {
            for (std::size_t b = 0; b < nb; ++b)
                column[b] = state(static_cast<Eigen::Index>(b * nk + k), j);
            repair_crossings(column);
            for (std::size_t b = 0; b < nb; ++b) depths[b][k] = column[b];
        }
        members.emplace_back(first.knots_x(), depths, first.layer_resistivities());
    }
    return Ensemble(std::move(members), like.weights());
}

Eigen::MatrixXd simulate_ensemble(const Ensemble& ensemble, Station station, const ToolSpec& tool) {
    Eigen::MatrixXd data(static_cast<Eigen::Index>(tool.channel_count()),
                         static_cast<Eigen::Index>(ensemble.size()));
    parallel_for(ensemble.size(), [&](std::size_t j) {
        const auto m = simulate(ensemble[j], station, tool);
        for (std::size_t c = 0; c < m.values.size(); ++c)
            data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) = m.values[c];
    });
    return data;
}

Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& state, const Eigen::MatrixXd& predicted,
                            const Eigen::VectorXd& noise_variance) {
    const Eigen::Index n = state.cols();
    if (n < 2) throw ArgumentError("the filter needs at least two members");
    if (predicted.cols() != n) throw ArgumentError("state and predicted data differ in member count");
    if (noise_variance.size() != predicted.rows())
        throw ArgumentError("noise variance length does not match the channel count");

    // Identical predictions carry no information. Compared exactly: the row
    // mean of equal values need not round back to them.
    if (((predicted.colwise() - predicted.col(0)).array() == 0.0).all())
        return Eigen::MatrixXd::Zero(state.rows(), predicted.rows());
    const Eigen::MatrixXd ay = state.colwise() - state.rowwise().mean();
    const Eigen::MatrixXd ad = predicted.colwise() - predicted.rowwise().mean();

    const double norm = 1.0 / static_cast<double>(n - 1);
    const Eigen::MatrixXd c_yd = norm * ay * ad.transpose();
    Eigen::MatrixXd c_dd = norm * ad * ad.transpose();
    c_dd.diagonal() += noise_variance;

    const Eigen::LLT<Eigen::MatrixXd> llt(c_dd);
    if (llt.info() != Eigen::Success) throw NumericalError("C_dd + R is not positive definite");
    // K = C_yd S^-1 with S symmetric, i.e. K^T = S^-1 C_yd^T.
    return llt.solve(c_yd.transpose()).transpose();
}

Eigen::MatrixXd perturb_observations(const Eigen::VectorXd& observed, const Eigen::VectorXd& noise_variance,
                                     std::size_t members, std::uint64_t seed) {
    if (noise_variance.size() != observed.size())
        throw ArgumentError("noise variance length does not match the channel count");
    Rng rng(seed);
    Eigen::MatrixXd out(observed.size(), static_cast<Eigen::Index>(members));
    for (Eigen::Index j = 0; j < out.cols(); ++j)
        for (Eigen::Index c = 0; c < out.rows(); ++c)
            out(c, j) = observed[c] + std::sqrt(noise_variance[c]) * rng.normal();
    return out;
}

Eigen::MatrixXd enkf_update(const Eigen::MatrixXd& state, const Eigen::MatrixXd& predicted,
                            const Eigen::MatrixXd& perturbed, const Eigen::MatrixXd& gain) {
    if (predicted.rows() != perturbed.rows() || predicted.cols() != perturbed.cols())
        throw ArgumentError("predicted and perturbed data differ in shape");
    if (gain.rows() != state.rows() || gain.cols() != predicted.rows())
        throw ArgumentError("gain shape does not match state and data");
    return state + gain * (perturbed - predicted);
}

AssimilationResult assimilate_with_diagnostics(const Ensemble& ensemble, Station station,
                                               const MeasurementVector& observed, const ToolSpec& tool,
                                               std::uint64_t seed) {
    if (ensemble.size() < 2) throw ArgumentError("the filter needs at least two members");
    if (observed.values.size() != tool.channel_count())
        throw ArgumentError("observation does not match the tool channel count");

    const Eigen::MatrixXd state = pack_state(ensemble);
    const Eigen::MatrixXd predicted = simulate_ensemble(ensemble, station, tool);
    const Eigen::VectorXd obs = Eigen::Map<const Eigen::VectorXd>(observed.values.data(),
                                                                  static_cast<Eigen::Index>(observed.values.size()));
    const Eigen::VectorXd r = Eigen::VectorXd::Constant(obs.size(), tool.noise_variance);

    const Eigen::MatrixXd gain = kalman_gain(state, predicted, r);
    AssimilationResult result;
    result.diagnostics.station = station;
    result.diagnostics.gain_frobenius = gain.norm();
    result.diagnostics.rms_before = rms_mismatch(predicted, observed.values);
    if (result.diagnostics.gain_frobenius == 0.0) {
        result.ensemble = ensemble;
        result.diagnostics.rms_after = result.diagnostics.rms_before;
        return result;
    }
    const Eigen::MatrixXd perturbed = perturb_observations(obs, r, ensemble.size(), seed);
    result.ensemble = unpack_state(ensemble, enkf_update(state, predicted, perturbed, gain));
    result.diagnostics.rms_after = innovation_rms(result.ensemble, station, observed, tool);
    return result;
}

Ensemble assimilate(const Ensemble& ensemble, Station station, const MeasurementVector& observed,
                    const ToolSpec& tool, std::uint64_t seed) {
    return assimilate_with_diagnostics(ensemble, station, observed, tool, seed).ensemble;
}

double innovation_rms(const Ensemble& ensemble, Station station, const MeasurementVector& observed,
                      const ToolSpec& tool) {
    return rms_mismatch(simulate_ensemble(ensemble, station, tool), observed.values);
}

InnovationStats innovation_stats(const Ensemble& before, const Ensemble& after, Station station,
                                 const MeasurementVector& observed, const ToolSpec& tool) {
    return {innovation_rms(before, station, observed, tool), innovation_rms(after, station, observed, tool)};
}

} // namespace geodss
