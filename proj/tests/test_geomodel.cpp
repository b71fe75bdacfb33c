#include "geodss/errors.hpp"
#include "geodss/geomodel.hpp"
#include "geodss/io.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <cmath>

using namespace geodss;

namespace {

Eigen::MatrixXd field_samples(const Ensemble& ens, const GeostatParams& p) {
    const std::size_t nb = p.boundary_means.size();
    const std::size_t nk = ens[0].knot_count();
    Eigen::MatrixXd s(static_cast<Eigen::Index>(nb * nk), static_cast<Eigen::Index>(ens.size()));
    for (std::size_t j = 0; j < ens.size(); ++j)
        for (std::size_t b = 0; b < nb; ++b)
            for (std::size_t k = 0; k < nk; ++k)
                s(static_cast<Eigen::Index>(b * nk + k), static_cast<Eigen::Index>(j)) =
                    ens[j].depth(b, k) - p.boundary_means[b];
    return s;
}

} // namespace

TEST_CASE("params validation and knot grid") {
    GeostatParams p;
    CHECK_NOTHROW(p.validate());
    const auto knots = p.knot_grid();
    CHECK(knots.front() <= p.x_extent.min);
    CHECK(knots.back() >= p.x_extent.max);
    CHECK(std::abs(knots[2]) < 1e-12);  // anchored at x = 0
    for (std::size_t k = 1; k < knots.size(); ++k) CHECK(knots[k] - knots[k - 1] == doctest::Approx(28.56));

    auto bad = p;
    bad.boundary_means = {0.0, 1.0};
    bad.layer_resistivities = {10, 150, 10};
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
    bad = p;
    bad.adjacent_correlation = 1.5;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
    bad = p;
    bad.layer_resistivities.pop_back();
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
    bad = p;
    bad.range = 0.0;
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("realization rejects crossing boundaries") {
    CHECK_THROWS_AS(EarthRealization({0.0, 1.0}, {{0.0, 0.0}, {1.0, -1.0}}, {10, 150, 10}), ArgumentError);
    CHECK_THROWS_AS(EarthRealization({0.0, 0.0}, {{0.0, 0.0}, {-1.0, -1.0}}, {10, 150, 10}), ArgumentError);
}

TEST_CASE("resistivity and layer queries on the mean model") {
    const auto m = mean_model(GeostatParams{});
    CHECK(resistivity_at(m, 100.0, 10.0) == 10.0);
    CHECK(resistivity_at(m, 100.0, -2.65) == 150.0);
    CHECK(resistivity_at(m, 100.0, 0.0) == 150.0);
    CHECK(resistivity_at(m, 100.0, -14.0) == 250.0);
    CHECK_THROWS_AS(resistivity_at(m, 1000.0, 0.0), DomainError);

    auto q = layer_query(m, 50.0, -1.0);
    CHECK(q.in_reservoir);
    CHECK(q.sand_ordinal == 0);
    CHECK(q.thickness == doctest::Approx(5.3));
    CHECK(q.depth_below_roof == doctest::Approx(1.0));

    q = layer_query(m, 50.0, 1.0);
    CHECK_FALSE(q.in_reservoir);

    q = layer_query(m, 50.0, -14.0);
    CHECK(q.in_reservoir);
    CHECK(q.sand_ordinal == 1);
    CHECK(q.thickness == doctest::Approx(6.8));
    CHECK(q.depth_below_roof == doctest::Approx(0.7));
}

TEST_CASE("interpolation is continuous across knots") {
    const auto truth = generate_truth(GeostatParams{}, 5);
    const double xk = truth.knots_x()[5];
    for (double z : {-3.0, -7.0, -15.0, 1.0}) {
        const auto at = truth.boundaries_at(xk);
        const auto left = truth.boundaries_at(xk - 1e-9);
        const auto right = truth.boundaries_at(xk + 1e-9);
        for (std::size_t b = 0; b < at.size(); ++b) {
            CHECK(left[b] == doctest::Approx(at[b]).epsilon(1e-9));
            CHECK(right[b] == doctest::Approx(at[b]).epsilon(1e-9));
        }
        bool near_boundary = false;
        for (double d : at) near_boundary |= std::abs(d - z) < 1e-6;
        if (!near_boundary) {
            CHECK(resistivity_at(truth, xk - 1e-9, z) == resistivity_at(truth, xk, z));
            CHECK(resistivity_at(truth, xk + 1e-9, z) == resistivity_at(truth, xk, z));
        }
    }
}

TEST_CASE("zero sill reproduces the means") {
    GeostatParams p;
    p.sill = 0.0;
    const auto ens = generate_ensemble(p, 4, 9);
    const auto mean = mean_model(p);
    for (const auto& m : ens.members()) CHECK(m == mean);
    CHECK(generate_truth(p, 3) == mean);
}

TEST_CASE("ensemble preconditions and weights") {
    CHECK_THROWS_AS(generate_ensemble(GeostatParams{}, 1, 1), ArgumentError);
    const auto ens = generate_ensemble(GeostatParams{}, 10, 1);
    double sum = 0.0;
    for (double w : ens.weights()) sum += w;
    CHECK(std::abs(sum - 1.0) < 1e-12);
    CHECK_THROWS_AS(Ensemble(ens.members(), std::vector<double>(10, -1.0)), ArgumentError);
}

TEST_CASE("sampler is deterministic and members differ") {
    const auto a = generate_ensemble(GeostatParams{}, 20, 77);
    const auto b = generate_ensemble(GeostatParams{}, 20, 77);
    CHECK(a == b);
    CHECK_FALSE(a[0] == a[1]);
    CHECK_FALSE(generate_truth(GeostatParams{}, 77) == a[0]);
}

TEST_CASE("no member has a layer thinner than the repair minimum") {
    GeostatParams p;
    p.sill = 40.0;  // crossings are common at this variance
    const auto ens = generate_ensemble(p, 200, 3);
    for (const auto& m : ens.members())
        for (std::size_t k = 0; k < m.knot_count(); ++k)
            for (std::size_t b = 1; b < m.boundary_count(); ++b)
                CHECK(m.depth(b - 1, k) - m.depth(b, k) >= kMinLayerThickness * (1 - 1e-9));
}

TEST_CASE("crossing repair keeps the mean and is a no-op on valid input") {
    std::vector<double> ok{0.0, -5.0, -13.0};
    const auto copy = ok;
    repair_crossings(ok);
    CHECK(ok == copy);

    std::vector<double> crossed{-1.0, 2.0, -3.0, -2.995};
    const double mean_before = (-1.0 + 2.0 - 3.0 - 2.995) / 4.0;
    repair_crossings(crossed);
    double mean_after = 0.0;
    for (double d : crossed) mean_after += d / 4.0;
    CHECK(mean_after == doctest::Approx(mean_before).epsilon(1e-12));
    for (std::size_t b = 1; b < crossed.size(); ++b) CHECK(crossed[b - 1] - crossed[b] >= kMinLayerThickness);
}

TEST_CASE("per-knot variance lies near the sill") {
    GeostatParams p;
    const auto ens = generate_ensemble(p, 100, 2024);
    const auto s = field_samples(ens, p);
    int inside = 0;
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
        const double mean = s.row(r).mean();
        const double var = (s.row(r).array() - mean).square().sum() / (s.cols() - 1);
        if (var >= 1.5 && var <= 3.5) ++inside;
    }
    CHECK(inside >= static_cast<int>(std::ceil(0.95 * s.rows())));
}

TEST_CASE("adjacent boundaries correlate at about 0.7") {
    GeostatParams p;
    const auto ens = generate_ensemble(p, 1000, 31);
    const auto s = field_samples(ens, p);
    const std::size_t nk = ens[0].knot_count();
    for (std::size_t b = 0; b + 1 < p.boundary_means.size(); ++b) {
        const auto k = static_cast<Eigen::Index>(nk / 2);
        const Eigen::VectorXd u = s.row(static_cast<Eigen::Index>(b * nk) + k).transpose();
        const Eigen::VectorXd v = s.row(static_cast<Eigen::Index>((b + 1) * nk) + k).transpose();
        const double cu = (u.array() - u.mean()).matrix().norm();
        const double cv = (v.array() - v.mean()).matrix().norm();
        const double corr = (u.array() - u.mean()).matrix().dot((v.array() - v.mean()).matrix()) / (cu * cv);
        CHECK(corr >= 0.6);
        CHECK(corr <= 0.8);
    }
}

TEST_CASE("sample covariance matches the Kronecker covariance") {
    // Oracle: build C = C_b (x) C_x directly and compare its eigen-spectrum
    // projections and entries against 4000 draws.
    GeostatParams p;
    const auto ens = generate_ensemble(p, 4000, 8);
    const auto s = field_samples(ens, p);
    const auto knots = p.knot_grid();
    const auto nb = static_cast<Eigen::Index>(p.boundary_means.size());
    const auto nk = static_cast<Eigen::Index>(knots.size());
    Eigen::MatrixXd c(nb * nk, nb * nk);
    for (Eigen::Index a = 0; a < nb; ++a)
        for (Eigen::Index b = 0; b < nb; ++b)
            for (Eigen::Index i = 0; i < nk; ++i)
                for (Eigen::Index j = 0; j < nk; ++j)
                    c(a * nk + i, b * nk + j) = std::pow(0.7, std::abs(a - b)) * p.sill *
                                                std::exp(-3.0 * std::abs(knots[i] - knots[j]) / p.range);

    const Eigen::MatrixXd centered = s.colwise() - s.rowwise().mean();
    const Eigen::MatrixXd sample = centered * centered.transpose() / double(s.cols() - 1);
    // Standard error of a covariance entry is at most sill*sqrt(2/n) ~ 0.056.
    CHECK((sample - c).cwiseAbs().maxCoeff() < 5 * 2.5 * std::sqrt(2.0 / 4000.0));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c);
    for (Eigen::Index e = c.rows() - 5; e < c.rows(); ++e) {
        const Eigen::VectorXd v = eig.eigenvectors().col(e);
        const double projected = v.dot(sample * v);
        const double lambda = eig.eigenvalues()(e);
        CHECK(std::abs(projected - lambda) < 5.0 * lambda * std::sqrt(2.0 / 4000.0));
    }
}

TEST_CASE("statistics do not depend on the extent") {
    GeostatParams a;
    GeostatParams b = a;
    b.x_extent.max = 2 * a.x_extent.max + 50.0;
    const auto ea = generate_ensemble(a, 1000, 100);
    const auto eb = generate_ensemble(b, 1000, 200);
    const double crit = 1.628 * std::sqrt(2.0 / 1000.0);  // 1% level
    for (std::size_t bnd = 0; bnd < 4; ++bnd) {
        for (std::size_t k : {2ul, 9ul, 16ul}) {
            std::vector<double> va, vb;
            for (std::size_t j = 0; j < 1000; ++j) {
                va.push_back(ea[j].depth(bnd, k));
                vb.push_back(eb[j].depth(bnd, k));
            }
            CHECK(ea[0].knots_x()[k] == eb[0].knots_x()[k]);
            CHECK(oracle::ks_statistic(va, vb) < crit);
        }
    }
}

TEST_CASE("scenario presets have the documented sand thicknesses") {
    const auto top = load_preset_truth("top_thicker");
    const auto bottom = load_preset_truth("bottom_thicker");
    for (double x = 0.0; x <= 350.0; x += 10.0) {
        const auto t = top.boundaries_at(x);
        CHECK(t[0] - t[1] == doctest::Approx(7.0).epsilon(0.05));
        CHECK(t[2] - t[3] == doctest::Approx(4.0).epsilon(0.05));
        const auto b = bottom.boundaries_at(x);
        CHECK(b[0] - b[1] == doctest::Approx(3.0).epsilon(0.05));
        CHECK(b[2] - b[3] == doctest::Approx(7.0).epsilon(0.05));
    }
    CHECK_THROWS_AS(load_preset_truth("no_such_preset"), ArgumentError);
}

TEST_CASE("realization json round trip") {
    const auto truth = generate_truth(GeostatParams{}, 4);
    const json j = truth;
    CHECK(j.get<EarthRealization>() == truth);
    const GeostatParams p;
    CHECK(json(p).get<GeostatParams>() == p);
}
