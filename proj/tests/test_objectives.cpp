#include "geodss/errors.hpp"
#include "geodss/objectives.hpp"

#include <doctest.h>

#include <cmath>

using namespace geodss;

namespace {

constexpr double kCost = 0.003 * 28.56;

EarthRealization flat(std::vector<double> depths) {
    std::vector<double> knots;
    for (int k = -2; k <= 16; ++k) knots.push_back(28.56 * k);
    std::vector<std::vector<double>> d;
    for (double z : depths) d.emplace_back(knots.size(), z);
    std::vector<double> res{10.0};
    for (std::size_t b = 0; b < depths.size(); ++b) res.push_back(b % 2 == 0 ? 150.0 : 10.0);
    return EarthRealization(knots, d, res);
}

Segment horizontal(double z, double x0 = 57.12) { return {{x0, z}, {x0 + 28.56, z}}; }

} // namespace

TEST_CASE("inclination") {
    CHECK(inclination(horizontal(0.0)) == 90.0);
    CHECK(inclination({{0, 0}, {28.56, -5.036}}) == doctest::Approx(80.0).epsilon(1e-4));
    CHECK(std::abs(inclination({{0, 0}, {28.56, -5.036}}) - 80.0) < 0.01);
    CHECK(inclination({{0, 0}, {28.56, -28.56}}) == doctest::Approx(45.0));
    try {
        inclination({{0, 0}, {28.56, 1.0}});
        FAIL("climbing segment accepted");
    } catch (const ConstraintViolation& e) {
        CHECK(e.constraint() == "non_climbing");
    }
}

TEST_CASE("dogleg") {
    const Constraints c;
    const double drop_811 = 28.56 / std::tan(81.1 * M_PI / 180.0);
    const double drop_83 = 28.56 / std::tan(83.0 * M_PI / 180.0);
    CHECK(dogleg_ok(80.0, {{0, 0}, {28.56, -drop_811}}, c));
    CHECK_FALSE(dogleg_ok(80.0, {{0, 0}, {28.56, -drop_83}}, c));
    CHECK(dogleg_ok(89.0, horizontal(0.0), c));
    CHECK_FALSE(dogleg_ok(89.0, {{0, 0}, {28.56, 0.5}}, c));
    Constraints tight;
    tight.max_inclination = 85.0;
    CHECK_FALSE(dogleg_ok(86.0, horizontal(0.0), tight));
}

TEST_CASE("position value units") {
    const auto thin = flat({0.0, -1.0, -10.0, -20.0});
    CHECK(position_value(horizontal(5.0), thin) == 0.0);
    CHECK(position_value(horizontal(-5.0), thin) == 0.0);
    CHECK(position_value(horizontal(-0.5), thin) == doctest::Approx(1.0).epsilon(1e-12));
    // A 1 m sand cannot hold z_roof = 1.5; 0.9 is the deepest sweet-spot depth inside it.
    CHECK(position_value(horizontal(-0.9), thin) == doctest::Approx(2.0).epsilon(1e-12));

    const auto thick = flat({0.0, -4.0, -10.0, -20.0});
    CHECK(position_value(horizontal(-1.5), thick) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(position_value(horizontal(-3.0), thick) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("sweet spot doubles the value") {
    const auto sweet = flat({0.0, -4.0, -10.0, -20.0});
    const auto moved = flat({2.0, -4.0, -10.0, -20.0});  // roof raised: the well sits 3 to 3.8 m below it
    const Segment s{{57.12, -1.0}, {85.68, -1.8}};
    const double h_ratio = 4.0 / 6.0;
    CHECK(position_value(s, sweet) == doctest::Approx(2.0 * h_ratio * position_value(s, moved)).epsilon(1e-12));
}

TEST_CASE("sand value") {
    const auto m = flat({0.0, -5.3, -13.3, -20.1});
    CHECK(sand_value(horizontal(-2.0), m) == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(sand_value(horizontal(-15.0), m) == doctest::Approx(14.0).epsilon(1e-12));
    CHECK(sand_value(horizontal(-8.0), m) == 0.0);
    CHECK(sand_value(horizontal(3.0), m) == 0.0);
}

TEST_CASE("drilling cost") {
    CHECK(drilling_cost(horizontal(0.0)) == doctest::Approx(-0.08568));
    CHECK(drilling_cost({{0, 0}, {28.56, -28.56}}) == doctest::Approx(-0.003 * 28.56 * std::sqrt(2.0)));
    CHECK(drilling_cost({{0, 0}, {0, 0}}) == 0.0);
}

TEST_CASE("combined segment value") {
    const auto thin = flat({0.0, -1.0, -10.0, -20.0});
    CHECK(segment_value(horizontal(-0.9), thin, ObjectiveWeights::primary()) ==
          doctest::Approx(2.0 - kCost).epsilon(1e-12));

    const auto m = flat({0.0, -5.3, -13.3, -20.1});
    CHECK(segment_value(horizontal(-14.8), m, ObjectiveWeights::alternative()) ==
          doctest::Approx(0.3 * 13.6 + 0.7 * 14.0 - kCost).epsilon(1e-12));
    CHECK(segment_value(horizontal(-14.8), m, ObjectiveWeights{0, 0, 0}) == 0.0);
}

TEST_CASE("segment value is linear in the weights") {
    const auto truth = flat({0.3, -4.1, -12.0, -18.0});
    const Segment s{{28.56, 1.0}, {57.12, -3.5}};
    const ObjectiveWeights a{0.4, 0.2, 1.0}, b{1.1, 0.5, 0.3};
    const ObjectiveWeights sum{a.w_position + b.w_position, a.w_sand + b.w_sand, a.w_cost + b.w_cost};
    CHECK(segment_value(s, truth, sum) ==
          doctest::Approx(segment_value(s, truth, a) + segment_value(s, truth, b)).epsilon(1e-12));
    const ObjectiveWeights scaled{3 * a.w_position, 3 * a.w_sand, 3 * a.w_cost};
    CHECK(segment_value(s, truth, scaled) == doctest::Approx(3 * segment_value(s, truth, a)).epsilon(1e-12));
}

TEST_CASE("quadrature refinement does not change values") {
    const auto truth = generate_truth(GeostatParams{}, 99);
    for (const Segment& s : {Segment{{0, 2.0}, {28.56, -3.0}}, Segment{{114.24, -4.0}, {142.8, -6.5}},
                             Segment{{200.0, -13.0}, {228.56, -14.0}}}) {
        const double v16 = segment_value(s, truth, ObjectiveWeights::alternative(), {16});
        const double v32 = segment_value(s, truth, ObjectiveWeights::alternative(), {32});
        const double v1 = segment_value(s, truth, ObjectiveWeights::alternative(), {1});
        CHECK(std::abs(v16 - v32) < 1e-3);
        CHECK(std::abs(v1 - v32) < 1e-9);
    }
}

TEST_CASE("value function validation and extra objectives") {
    CHECK_THROWS_AS(ValueFunction(ObjectiveWeights{-1.0, 0, 1}), ArgumentError);
    ValueFunction v(ObjectiveWeights::primary());
    const auto m = flat({0.0, -1.0, -10.0, -20.0});
    const double base = v(horizontal(-0.5), m);
    v.add_objective("flat_bonus", 2.0, [](const Segment& s, const EarthRealization&) {
        return s.drop() == 0.0 ? 1.0 : 0.0;
    });
    CHECK(v.extra_objective_count() == 1);
    CHECK(v(horizontal(-0.5), m) == doctest::Approx(base + 2.0));
    CHECK_THROWS_AS(v.add_objective("bad", -1.0, nullptr), ArgumentError);
    CHECK_THROWS_AS(segment_terms({{-500, 0}, {-471.44, 0}}, m), DomainError);
}
