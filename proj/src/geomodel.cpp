#include "geodss/geomodel.hpp"

#include "geodss/errors.hpp"
#include "geodss/parallel.hpp"
#include "geodss/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace geodss {

namespace {

constexpr std::uint64_t kEnsembleStream = 0x656e73656d626c65ULL;  // "ensemble"
constexpr std::uint64_t kTruthStream = 0x7472757468ULL;           // "truth"

void require(bool ok, const std::string& message) {
    if (!ok) throw ArgumentError(message);
}

/// Symmetric square root S with S*S = C for a symmetric PSD matrix.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& cov, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) {
        throw GenerationError(std::string("eigendecomposition failed for ") + what + " covariance");
    }
    Eigen::VectorXd lambda = eig.eigenvalues();
    const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (lambda[i] < -1e-10 * scale) {
            throw GenerationError(std::string(what) + " covariance is not positive semi-definite");
        }
        lambda[i] = std::sqrt(std::max(lambda[i], 0.0));
    }
    return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

class FieldSampler {
public:
    explicit FieldSampler(const GeostatParams& params)
        : params_(params), knots_(params.knot_grid()) {
        const auto nb = static_cast<Eigen::Index>(params.boundary_means.size());
        const auto nk = static_cast<Eigen::Index>(knots_.size());

        Eigen::MatrixXd cb(nb, nb);
        for (Eigen::Index a = 0; a < nb; ++a)
            for (Eigen::Index b = 0; b < nb; ++b)
                cb(a, b) = std::pow(params.adjacent_correlation, static_cast<double>(std::abs(a - b)));

        Eigen::MatrixXd cx(nk, nk);
        for (Eigen::Index i = 0; i < nk; ++i) {
            for (Eigen::Index j = 0; j < nk; ++j) {
                const double h = std::abs(knots_[i] - knots_[j]);
                cx(i, j) = params.sill * std::exp(-3.0 * h / params.range);
            }
            cx(i, i) += params.nugget;
        }
        sqrt_b_ = symmetric_sqrt(cb, "cross-boundary");
        sqrt_x_ = symmetric_sqrt(cx, "lateral");
    }

    EarthRealization sample(std::uint64_t seed) const {
        const auto nb = sqrt_b_.rows();
        const auto nk = sqrt_x_.rows();
        Rng rng(seed);
        Eigen::MatrixXd white(nb, nk);
        for (Eigen::Index b = 0; b < nb; ++b)
            for (Eigen::Index k = 0; k < nk; ++k) white(b, k) = rng.normal();

        const Eigen::MatrixXd field = sqrt_b_ * white * sqrt_x_.transpose();

        std::vector<std::vector<double>> depths(static_cast<std::size_t>(nb),
                                                std::vector<double>(static_cast<std::size_t>(nk)));
        std::vector<double> column(static_cast<std::size_t>(nb));
        for (Eigen::Index k = 0; k < nk; ++k) {
            for (Eigen::Index b = 0; b < nb; ++b)
                column[b] = params_.boundary_means[b] + field(b, k);
            repair_crossings(column);
            for (Eigen::Index b = 0; b < nb; ++b) depths[b][k] = column[b];
        }
        return EarthRealization(knots_, depths, params_.layer_resistivities);
    }

private:
    const GeostatParams& params_;
    std::vector<double> knots_;
    Eigen::MatrixXd sqrt_b_;
    Eigen::MatrixXd sqrt_x_;
};

} // namespace

void GeostatParams::validate() const {
    require(!boundary_means.empty(), "at least one boundary is required");
    for (std::size_t b = 1; b < boundary_means.size(); ++b)
        require(boundary_means[b] < boundary_means[b - 1], "boundary_means must be strictly decreasing");
    require(std::isfinite(sill) && sill >= 0.0, "sill must be >= 0");
    require(std::isfinite(range) && range > 0.0, "range must be > 0");
    require(std::isfinite(nugget) && nugget >= 0.0, "nugget must be >= 0");
    require(adjacent_correlation >= 0.0 && adjacent_correlation <= 1.0,
            "adjacent_correlation must lie in [0, 1]");
    require(std::isfinite(knot_spacing) && knot_spacing > 0.0, "knot_spacing must be > 0");
    require(x_extent.max > x_extent.min, "x_extent must be a non-empty interval");
    require(layer_resistivities.size() == boundary_means.size() + 1,
            "need exactly one resistivity per layer (boundary count + 1)");
    for (double r : layer_resistivities)
        require(std::isfinite(r) && r > 0.0, "layer resistivities must be positive");
}

std::vector<double> GeostatParams::knot_grid() const {
    const auto first = static_cast<long>(std::floor(x_extent.min / knot_spacing + 1e-9));
    const auto last = static_cast<long>(std::ceil(x_extent.max / knot_spacing - 1e-9));
    std::vector<double> knots;
    knots.reserve(static_cast<std::size_t>(last - first + 1));
    for (long i = first; i <= last; ++i) knots.push_back(static_cast<double>(i) * knot_spacing);
    return knots;
}

EarthRealization::EarthRealization(std::vector<double> knots_x,
                                   const std::vector<std::vector<double>>& boundary_depths,
                                   std::vector<double> layer_resistivities)
    : knots_x_(std::move(knots_x)),
      resistivities_(std::move(layer_resistivities)),
      boundary_count_(boundary_depths.size()) {
    require(knots_x_.size() >= 2, "a realization needs at least two knots");
    for (std::size_t k = 1; k < knots_x_.size(); ++k)
        require(knots_x_[k] > knots_x_[k - 1], "knots_x must be strictly increasing");
    require(boundary_count_ >= 1, "a realization needs at least one boundary");
    require(resistivities_.size() == boundary_count_ + 1, "need one resistivity per layer");

    const std::size_t nk = knots_x_.size();
    depths_.reserve(boundary_count_ * nk);
    for (const auto& row : boundary_depths) {
        require(row.size() == nk, "every boundary needs one depth per knot");
        for (double d : row) require(std::isfinite(d), "boundary depths must be finite");
        depths_.insert(depths_.end(), row.begin(), row.end());
    }
    for (std::size_t k = 0; k < nk; ++k)
        for (std::size_t b = 1; b < boundary_count_; ++b)
            require(depth(b, k) < depth(b - 1, k), "boundaries must not cross");
}

std::vector<std::vector<double>> EarthRealization::boundary_depths() const {
    std::vector<std::vector<double>> out;
    out.reserve(boundary_count_);
    for (std::size_t b = 0; b < boundary_count_; ++b) {
        const auto row = boundary(b);
        out.emplace_back(row.begin(), row.end());
    }
    return out;
}

std::size_t EarthRealization::knot_interval(double x) const {
    if (!contains_x(x)) {
        throw DomainError("x = " + std::to_string(x) + " outside model extent [" +
                          std::to_string(x_min()) + ", " + std::to_string(x_max()) + "]");
    }
    const auto it = std::upper_bound(knots_x_.begin(), knots_x_.end(), x);
    const auto k = static_cast<std::size_t>(std::distance(knots_x_.begin(), it));
    return std::min(k == 0 ? 0 : k - 1, knots_x_.size() - 2);
}

void EarthRealization::boundaries_at(double x, std::span<double> out) const {
    const std::size_t k = knot_interval(x);
    const double x0 = knots_x_[k];
    const double x1 = knots_x_[k + 1];
    const double t = (x - x0) / (x1 - x0);
    for (std::size_t b = 0; b < boundary_count_; ++b) {
        const double d0 = depth(b, k);
        const double d1 = depth(b, k + 1);
        out[b] = d0 + t * (d1 - d0);
    }
}

std::vector<double> EarthRealization::boundaries_at(double x) const {
    std::vector<double> out(boundary_count_);
    boundaries_at(x, out);
    return out;
}

Ensemble::Ensemble(std::vector<EarthRealization> members)
    : Ensemble(std::move(members), {}) {}

Ensemble::Ensemble(std::vector<EarthRealization> members, std::vector<double> weights)
    : members_(std::move(members)), weights_(std::move(weights)) {
    require(!members_.empty(), "an ensemble needs at least one member");
    const auto& first = members_.front();
    for (const auto& m : members_) {
        require(m.knots_x() == first.knots_x(), "ensemble members must share knots_x");
        require(m.layer_resistivities() == first.layer_resistivities(),
                "ensemble members must share layer_resistivities");
    }
    if (weights_.empty()) {
        weights_.assign(members_.size(), 1.0 / static_cast<double>(members_.size()));
        return;
    }
    require(weights_.size() == members_.size(), "one weight per member is required");
    double total = 0.0;
    for (double w : weights_) {
        require(std::isfinite(w) && w >= 0.0, "ensemble weights must be non-negative");
        total += w;
    }
    require(total > 0.0, "ensemble weights must have a positive sum");
    for (double& w : weights_) w /= total;
}

std::size_t layer_index(std::span<const double> boundary_depths, double z) noexcept {
    std::size_t layer = 0;
    while (layer < boundary_depths.size() && z <= boundary_depths[layer]) ++layer;
    return layer;
}

double resistivity_at(const EarthRealization& model, double x, double z) {
    double buf[16];
    std::vector<double> heap;
    std::span<double> depths;
    if (model.boundary_count() <= 16) {
        depths = std::span<double>(buf, model.boundary_count());
    } else {
        heap.resize(model.boundary_count());
        depths = heap;
    }
    model.boundaries_at(x, depths);
    return model.layer_resistivities()[layer_index(depths, z)];
}

LayerInfo layer_query(const EarthRealization& model, double x, double z) {
    const std::vector<double> depths = model.boundaries_at(x);
    LayerInfo info;
    info.layer = layer_index(depths, z);
    const std::size_t nb = depths.size();
    const bool bounded = info.layer >= 1 && info.layer < nb;
    info.thickness = bounded ? depths[info.layer - 1] - depths[info.layer]
                             : std::numeric_limits<double>::infinity();
    info.depth_below_roof = info.layer >= 1 ? depths[info.layer - 1] - z : 0.0;
    info.in_reservoir = bounded && is_reservoir_layer(info.layer);
    info.sand_ordinal = info.layer / 2;
    return info;
}

EarthRealization mean_model(const GeostatParams& params) {
    params.validate();
    const auto knots = params.knot_grid();
    std::vector<std::vector<double>> depths;
    for (double mean : params.boundary_means) depths.emplace_back(knots.size(), mean);
    return EarthRealization(knots, depths, params.layer_resistivities);
}

void repair_crossings(std::span<double> depths, double min_thickness) {
    const std::size_t n = depths.size();
    bool ok = true;
    for (std::size_t b = 1; b < n && ok; ++b) ok = depths[b - 1] - depths[b] >= min_thickness;
    if (ok) return;

    std::sort(depths.begin(), depths.end(), std::greater<>());
    // Pool adjacent violators on u_b = d_b + b*gap, which must be
    // non-increasing. The gap is padded so the rounded result still honors
    // min_thickness.
    const double gap = min_thickness * (1.0 + 1e-9) + 1e-12;
    std::vector<double> block_sum;
    std::vector<std::size_t> block_len;
    for (std::size_t b = 0; b < n; ++b) {
        block_sum.push_back(depths[b] + static_cast<double>(b) * gap);
        block_len.push_back(1);
        while (block_sum.size() > 1) {
            const std::size_t last = block_sum.size() - 1;
            const double prev_mean = block_sum[last - 1] / static_cast<double>(block_len[last - 1]);
            const double cur_mean = block_sum[last] / static_cast<double>(block_len[last]);
            if (prev_mean >= cur_mean) break;
            block_sum[last - 1] += block_sum[last];
            block_len[last - 1] += block_len[last];
            block_sum.pop_back();
            block_len.pop_back();
        }
    }
    std::size_t b = 0;
    for (std::size_t blk = 0; blk < block_sum.size(); ++blk) {
        const double mean = block_sum[blk] / static_cast<double>(block_len[blk]);
        for (std::size_t i = 0; i < block_len[blk]; ++i, ++b)
            depths[b] = mean - static_cast<double>(b) * gap;
    }
}

EarthRealization repaired(const EarthRealization& model) {
    auto depths = model.boundary_depths();
    std::vector<double> column(model.boundary_count());
    for (std::size_t k = 0; k < model.knot_count(); ++k) {
        for (std::size_t b = 0; b < column.size(); ++b) column[b] = depths[b][k];
        repair_crossings(column);
        for (std::size_t b = 0; b < column.size(); ++b) depths[b][k] = column[b];
    }
    return EarthRealization(model.knots_x(), depths, model.layer_resistivities());
}

Ensemble generate_ensemble(const GeostatParams& params, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw ArgumentError("ensemble size must be >= 2");
    params.validate();
    const FieldSampler sampler(params);
    std::vector<EarthRealization> members(n);
    parallel_for(n, [&](std::size_t j) {
        members[j] = sampler.sample(derive_seed(seed, j, kEnsembleStream));
    });
    return Ensemble(std::move(members));
}

EarthRealization generate_truth(const GeostatParams& params, std::uint64_t seed) {
    params.validate();
    const FieldSampler sampler(params);
    return sampler.sample(derive_seed(seed, 0, kTruthStream));
}

} // namespace geodss
