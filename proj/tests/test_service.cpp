#include "geodss/errors.hpp"
#include "geodss/service.hpp"
#include "geodss/view.hpp"

#include <doctest.h>
#include <httplib.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <thread>

using namespace geodss;
using namespace std::chrono_literals;

namespace {

const json kSmall = {{"ensemble_size", 10}};

} // namespace

TEST_CASE("host versions, ids and errors") {
    SessionHost host;
    const std::string a = host.create(kSmall);
    const std::string b = host.create(kSmall);
    CHECK(a != b);
    CHECK(host.session_count() == 2);
    CHECK(host.state(a)->at("version") == 1);

    const auto v = host.post_decision(a, {{"action", "accept"}});
    CHECK(v->at("version") == 2);
    CHECK(host.state(a)->at("version") == 2);
    CHECK(host.state(b)->at("version") == 1);
    CHECK(v->at("step") == 1);

    CHECK_THROWS_AS(host.state("s999"), NotFoundError);
    CHECK_THROWS_AS(host.post_weights(a, {{"w_position", -1.0}}), ArgumentError);
    CHECK_THROWS_AS(host.post_decision(a, {{"action", "jump"}}), ArgumentError);
    CHECK_THROWS_AS(host.create({{"ensemble_size", 1}}), ArgumentError);
    CHECK_THROWS_AS(host.create({{"gamma", "high"}}), ArgumentError);
    try {
        host.post_decision(a, {{"action", "steer"}, {"target_z", 15.25}});
        FAIL("climbing steer accepted");
    } catch (const ConstraintViolation& e) {
        CHECK(e.constraint() == "non_climbing");
    }
    CHECK(host.state(a)->at("version") == 2);

    host.post_decision(a, {{"action", "stop"}});
    CHECK(host.state(a)->at("status") == "STOPPED");
    CHECK_FALSE(host.state(a)->at("metrics").is_null());
    CHECK_THROWS_AS(host.post_decision(a, {{"action", "accept"}}), SessionStateError);
}

TEST_CASE("state view contents") {
    SessionHost host;
    const auto id = host.create(kSmall);
    const auto v = *host.state(id);
    for (const char* key : {"version", "bit", "drilled", "recommendation", "weights", "gamma", "per_realization",
                            "value_cdf", "value_cdf_mean", "pointcloud", "realization_count", "status", "metrics"})
        CHECK(v.contains(key));
    CHECK(v.at("realization_count") == 10);
    CHECK(v.at("per_realization").size() == 10);
    CHECK(v.at("metrics").is_null());
    CHECK(v.at("bit").at("z") == 15.0);
    const auto& rec = v.at("recommendation");
    CHECK(rec.contains("expected_value"));
    if (rec.at("action") == "steer") CHECK(rec.contains("target_z"));

    const auto& cdf = v.at("value_cdf");
    CHECK(cdf.size() == 10);
    CHECK(std::is_sorted(cdf.begin(), cdf.end()));
    // Nothing drilled yet: the CDF mean is the expected value.
    CHECK(v.at("value_cdf_mean").get<double>() == doctest::Approx(rec.at("expected_value").get<double>()));

    const auto& pc = v.at("pointcloud");
    CHECK(pc.at("values").size() == pc.at("nx").get<std::size_t>() * pc.at("nz").get<std::size_t>());
}

TEST_CASE("pointcloud averages member resistivities") {
    const auto ens = generate_ensemble(GeostatParams{}, 7, 3);
    const auto pc = ensemble_pointcloud(ens, 0.0, 40.0, -40.0, 20.0, 4.0, 0.5);
    CHECK(pc.nx == 10);
    CHECK(pc.nz == 120);
    // Far above every sand.
    CHECK(pc.values[(pc.nz - 1) * pc.nx] == 10.0);
    for (std::size_t ix : {0u, 5u, 9u})
        for (std::size_t iz : {30u, 70u, 90u, 100u}) {
            const Point c = pc.cell_center(ix, iz);
            double sum = 0.0;
            for (const auto& m : ens.members()) sum += resistivity_at(m, c.x, c.z);
            CHECK(std::abs(pc.values[iz * pc.nx + ix] - sum / 7.0) < 1e-9);
        }
    CHECK_THROWS_AS(ensemble_pointcloud(Ensemble{}, 0, 1, 0, 1), ArgumentError);
}

TEST_CASE("one event per mutation with increasing versions") {
    SessionHost host;
    const auto id = host.create(kSmall);
    auto sub = host.subscribe(id);
    CHECK_FALSE(sub->next(20ms).has_value());

    host.post_decision(id, {{"action", "accept"}});
    host.post_weights(id, ObjectiveWeights::alternative());
    const auto e1 = sub->next(1s);
    const auto e2 = sub->next(1s);
    REQUIRE(e1.has_value());
    REQUIRE(e2.has_value());
    CHECK(e1->rfind("event: state\nid: 2\ndata: ", 0) == 0);
    CHECK(e2->rfind("event: state\nid: 3\ndata: ", 0) == 0);
    CHECK(e1->substr(e1->size() - 2) == "\n\n");
    CHECK_FALSE(sub->next(20ms).has_value());

    // A rejected mutation publishes nothing.
    CHECK_THROWS(host.post_decision(id, {{"action", "steer"}, {"target_z", 99.0}}));
    CHECK_FALSE(sub->next(20ms).has_value());

    const std::string data = e2->substr(e2->find("data: ") + 6);
    CHECK(json::parse(data).at("version") == 3);

    host.unsubscribe(id, sub);
    CHECK(sub->closed());
    host.post_decision(id, {{"action", "accept"}});
    CHECK_FALSE(sub->next(20ms).has_value());
}

TEST_CASE("snapshots survive a host restart") {
    const auto dir = std::filesystem::temp_directory_path() / "geodss_snapshot_test";
    std::filesystem::remove_all(dir);
    std::string id;
    json before;
    {
        SessionHost host(dir);
        id = host.create(kSmall);
        host.post_decision(id, {{"action", "accept"}});
        host.post_weights(id, ObjectiveWeights::alternative());
        before = *host.state(id);
    }
    SessionHost again(dir);
    CHECK(again.session_count() == 1);
    const auto after = *again.state(id);
    CHECK(after.at("version") == before.at("version"));
    CHECK(after.at("drilled") == before.at("drilled"));
    CHECK(after.at("recommendation") == before.at("recommendation"));
    CHECK(again.create(kSmall) != id);
    std::filesystem::remove_all(dir);
}

TEST_CASE("port from environment") {
    unsetenv("GEODSS_PORT");
    CHECK(port_from_env(8080) == 8080);
    setenv("GEODSS_PORT", "9123", 1);
    CHECK(port_from_env(8080) == 9123);
    setenv("GEODSS_PORT", "http", 1);
    CHECK_THROWS_AS(port_from_env(8080), ArgumentError);
    unsetenv("GEODSS_PORT");
}

TEST_CASE("http endpoints and event stream") {
    SessionHost host;
    ServerOptions opt;
    opt.port = 0;
    opt.heartbeat = 100ms;
    DssServer server(host, opt);
    const int port = server.start();
    REQUIRE(port > 0);

    httplib::Client cli("127.0.0.1", port);
    cli.set_read_timeout(30, 0);

    auto created = cli.Post("/sessions", kSmall.dump(), "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    const std::string id = json::parse(created->body).at("id");

    auto bad = cli.Post("/sessions", "{not json", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);

    auto missing = cli.Get("/sessions/nope/state");
    REQUIRE(missing);
    CHECK(missing->status == 404);

    auto state = cli.Get(("/sessions/" + id + "/state").c_str());
    REQUIRE(state);
    CHECK(state->status == 200);
    CHECK(json::parse(state->body).at("version") == 1);

    auto dogleg = cli.Post(("/sessions/" + id + "/decision").c_str(), R"({"action":"steer","target_z":-20})",
                           "application/json");
    REQUIRE(dogleg);
    CHECK(dogleg->status == 409);
    CHECK(json::parse(dogleg->body).at("constraint") == "dogleg");

    auto neg = cli.Post(("/sessions/" + id + "/weights").c_str(), R"({"w_position":-1})", "application/json");
    REQUIRE(neg);
    CHECK(neg->status == 400);

    std::atomic<bool> connected{false};
    std::atomic<bool> keepalive{false};
    std::string stream;
    std::thread reader([&] {
        httplib::Client sse("127.0.0.1", port);
        sse.set_read_timeout(30, 0);
        sse.Get(("/sessions/" + id + "/events").c_str(), [&](const char* data, std::size_t n) {
            const std::string chunk(data, n);
            if (chunk.rfind(": keepalive", 0) == 0) keepalive = true;
            stream += chunk;
            connected = true;
            return stream.find("event: state") == std::string::npos;
        });
    });
    for (int i = 0; i < 300 && !connected; ++i) std::this_thread::sleep_for(10ms);
    CHECK(connected);

    auto accepted = cli.Post(("/sessions/" + id + "/decision").c_str(), R"({"action":"accept"})", "application/json");
    REQUIRE(accepted);
    CHECK(accepted->status == 200);
    reader.join();
    CHECK(keepalive);
    CHECK(stream.find("event: state\nid: 2\n") != std::string::npos);

    auto stop = cli.Post(("/sessions/" + id + "/decision").c_str(), R"({"action":"stop"})", "application/json");
    REQUIRE(stop);
    auto late = cli.Post(("/sessions/" + id + "/decision").c_str(), R"({"action":"accept"})", "application/json");
    REQUIRE(late);
    CHECK(late->status == 409);

    server.stop();
}
