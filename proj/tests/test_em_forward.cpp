#include "geodss/em_forward.hpp"
#include "geodss/errors.hpp"
#include "geodss/io.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <sstream>

using namespace geodss;

namespace {

EarthRealization flat(std::vector<double> depths, std::vector<double> res) {
    std::vector<double> knots{-60.0, 0.0, 60.0, 120.0, 180.0, 240.0, 300.0, 360.0, 420.0, 480.0};
    std::vector<std::vector<double>> d;
    for (double z : depths) d.emplace_back(knots.size(), z);
    return EarthRealization(knots, d, std::move(res));
}

} // namespace

TEST_CASE("kernel mass") {
    CHECK(kernel_mass(0.0, 5.0) == 0.0);
    CHECK(kernel_mass(5.0, 5.0) == doctest::Approx(1.0));
    CHECK(kernel_mass(9.0, 5.0) == 1.0);
    CHECK(kernel_mass(-1.0, 5.0) == 0.0);
    CHECK(kernel_mass(2.5, 5.0) == doctest::Approx(0.75));
}

TEST_CASE("homogeneous model reads its resistivity") {
    const auto m = flat({0.0, -5.0}, {10.0, 10.0, 10.0});
    const auto r = simulate(m, {100.0, -2.0}, ToolSpec{});
    REQUIRE(r.values.size() == 2);
    CHECK(std::abs(r.values[0] - 10.0) < 1e-10);
    CHECK(std::abs(r.values[1] - 10.0) < 1e-10);
}

TEST_CASE("channels agree with a fine-quadrature oracle") {
    // 1e4 midpoint cells misplace a jump by at most one cell: 140 * 5e-4 * 0.4.
    const double tol = 0.03;
    const auto mean = mean_model(GeostatParams{});
    const auto truth = generate_truth(GeostatParams{}, 12);
    const ToolSpec tool;
    for (const auto* m : {&mean, &truth}) {
        for (double x : {0.0, 37.0, 140.0, 300.0}) {
            for (double z : {6.0, 2.0, -2.65, -4.0, -9.3, -12.5, -17.0, -22.0}) {
                const auto r = simulate(*m, {x, z}, tool);
                CHECK(std::abs(r.values[0] - oracle::em_channel(*m, x, z, 5.0, +1)) < tol);
                CHECK(std::abs(r.values[1] - oracle::em_channel(*m, x, z, 5.0, -1)) < tol);
            }
        }
    }
}

TEST_CASE("mid-shale station sees both sands, the lower one more") {
    const auto m = mean_model(GeostatParams{});
    const auto r = simulate(m, {100.0, -9.3}, ToolSpec{});
    CHECK(r.values[0] > 10.0);
    CHECK(r.values[1] > 10.0);
    CHECK(r.values[1] > r.values[0]);
}

TEST_CASE("raising a layer resistivity raises the channels that see it") {
    const auto base = mean_model(GeostatParams{});
    auto res = base.layer_resistivities();
    res[1] += 50.0;
    const EarthRealization hot(base.knots_x(), base.boundary_depths(), res);
    const Station st{100.0, 2.0};  // top sand within reach below only
    const auto a = simulate(base, st, ToolSpec{});
    const auto b = simulate(hot, st, ToolSpec{});
    CHECK(b.values[1] > a.values[1]);
    CHECK(b.values[0] == doctest::Approx(a.values[0]));
}

TEST_CASE("simulate rejects stations outside the extent") {
    const auto m = mean_model(GeostatParams{});
    CHECK_THROWS_AS(simulate(m, {-500.0, 0.0}, ToolSpec{}), DomainError);
}

TEST_CASE("tool validation") {
    ToolSpec t;
    t.doi = 0.0;
    CHECK_THROWS_AS(t.validate(), ArgumentError);
    t = ToolSpec{};
    t.noise_variance = -1.0;
    CHECK_THROWS_AS(t.validate(), ArgumentError);
}

TEST_CASE("observation noise has the configured variance") {
    const auto m = mean_model(GeostatParams{});
    const ToolSpec tool;
    const Station st{100.0, -2.65};
    const auto clean = simulate(m, st, tool);
    const int n = 10000;
    for (std::size_t c = 0; c < 2; ++c) {
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double e = observe(m, st, tool, derive_seed(42, static_cast<std::uint64_t>(i)))
                                 .values[c] - clean.values[c];
            s += e;
            s2 += e * e;
        }
        const double var = (s2 - s * s / n) / (n - 1);
        CHECK(var >= 0.45);
        CHECK(var <= 0.55);
    }
    CHECK(observe(m, st, tool, 5) == observe(m, st, tool, 5));
}

TEST_CASE("measurement csv") {
    const ToolSpec tool;
    std::vector<MeasurementVector> log{{{28.56, 10.25}, {10.0, 12.5}}, {{57.12, 6.5}, {11.0, 20.0}}};
    std::ostringstream out;
    write_measurements_csv(out, log, tool);
    const std::string s = out.str();
    CHECK(s.rfind("x,z,channel_up,channel_down\n", 0) == 0);
    std::istringstream in(s);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::vector<double> fields;
    std::istringstream row(line);
    for (std::string f; std::getline(row, f, ',');) fields.push_back(std::stod(f));
    CHECK(fields == std::vector<double>{28.56, 10.25, 10.0, 12.5});

    const json j = log[0];
    CHECK(j.get<MeasurementVector>() == log[0]);
}
