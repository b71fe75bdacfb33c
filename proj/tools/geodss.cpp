// geodss: benchmark, scenario replay and session server.

#include "geodss/bench.hpp"
#include "geodss/errors.hpp"
#include "geodss/random.hpp"
#include "geodss/service.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitArguments = 2;
constexpr int kExitUndefined = 3;

geodss::DssServer* g_server = nullptr;

void print_aggregate(const geodss::BenchResult& r) {
    const auto& a = r.aggregate;
    std::printf("gamma=%g cases=%zu defined=%zu undefined=%zu\n", r.gamma, a.cases, a.defined, a.undefined);
    std::printf("mean relative value: %.2f%%  (min %.2f%%, max %.2f%%)\n", a.mean_relative, a.min_relative, a.max_relative);
    std::printf("landing optimal: %.1f%%\n", a.landing_optimal_rate);
    std::printf("%-10s %6s %5s %7s %5s\n", "bin", "count", "top", "bottom", "none");
    for (std::size_t b = 0; b < 10; ++b) {
        char label[16];
        std::snprintf(label, sizeof label, "[%zu,%zu%c", b * 10, b * 10 + 10, b == 9 ? ']' : ')');
        std::printf("%-10s %6d %5d %7d %5d\n", label, a.histogram.counts[b], a.histogram.landed_top[b],
                    a.histogram.landed_bottom[b], a.histogram.landed_none[b]);
    }
    if (a.histogram.below_zero || a.histogram.above_hundred)
        std::printf("below 0%%: %d  above 100%%: %d\n", a.histogram.below_zero, a.histogram.above_hundred);
}

bool too_many_undefined(const geodss::BenchResult& r) {
    return 10 * r.aggregate.undefined > r.aggregate.cases;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geosteering decision support: benchmark, scenarios and session server"};
    app.require_subcommand(1);

    std::size_t cases = 100;
    std::size_t ensemble = 100;
    double gamma = 1.0;
    std::uint64_t seed = 1;
    std::string out_csv;
    std::string out_json;
    std::optional<double> compare_gamma;
    auto* bench = app.add_subcommand("bench", "Run seeded automatic steering cases");
    bench->add_option("--cases", cases, "Number of cases")->check(CLI::PositiveNumber);
    bench->add_option("--ensemble", ensemble, "Ensemble size")->check(CLI::Range(2, 100000));
    bench->add_option("--gamma", gamma, "Discount factor")->check(CLI::Range(0.0, 1.0));
    bench->add_option("--seed", seed, "Master seed");
    bench->add_option("--out", out_csv, "Per-case CSV output")->required();
    bench->add_option("--json", out_json, "JSON output with aggregates");
    bench->add_option("--compare-gamma", compare_gamma, "Paired run at a second discount factor")
        ->check(CLI::Range(0.0, 1.0));

    std::string preset;
    std::string out_dir;
    auto* scenario = app.add_subcommand("scenario", "Replay a scripted scenario");
    scenario->add_option("--preset", preset, "top_thicker | bottom_thicker | reweight_midrun")
        ->required()
        ->check(CLI::IsMember(geodss::scenario_presets()));
    scenario->add_option("--out", out_dir, "Output directory")->required();
    scenario->add_option("--ensemble", ensemble, "Ensemble size")->check(CLI::Range(2, 100000));
    scenario->add_option("--gamma", gamma, "Discount factor")->check(CLI::Range(0.0, 1.0));
    scenario->add_option("--seed", seed, "Seed for the prior ensemble and noise");

    int port = 8080;
    std::string host = "127.0.0.1";
    std::string snapshots;
    auto* serve = app.add_subcommand("serve", "Serve sessions over HTTP");
    auto* port_opt = serve->add_option("--port", port, "Port (default GEODSS_PORT or 8080)")->check(CLI::Range(0, 65535));
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--snapshots", snapshots, "Directory for session snapshots");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitArguments;
    }

    try {
        if (*bench) {
            geodss::SessionConfig base;
            base.ensemble_size = ensemble;
            base.validate();
            const auto result = geodss::run_bench(cases, base, gamma, seed);
            std::optional<geodss::BenchResult> other;
            if (compare_gamma) other = geodss::run_bench(cases, base, *compare_gamma, seed);

            std::ofstream csv(out_csv);
            if (!csv) throw geodss::ArgumentError("cannot write " + out_csv);
            geodss::write_bench_csv(csv, result);
            if (other) {
                const auto dot = out_csv.rfind('.');
                const std::string second = (dot == std::string::npos ? out_csv : out_csv.substr(0, dot)) + "_gamma" +
                                           std::to_string(*compare_gamma).substr(0, 4) +
                                           (dot == std::string::npos ? ".csv" : out_csv.substr(dot));
                std::ofstream csv2(second);
                geodss::write_bench_csv(csv2, *other);
            }
            if (!out_json.empty()) {
                std::ofstream js(out_json);
                if (!js) throw geodss::ArgumentError("cannot write " + out_json);
                js << geodss::bench_json(result, other).dump(2) << '\n';
            }

            print_aggregate(result);
            if (other) {
                print_aggregate(*other);
                const auto c = geodss::compare_runs(result, *other);
                std::printf("paired delta (gamma %g - gamma %g): %+.2f points over %zu cases\n", c.gamma_b, c.gamma_a,
                            c.mean_delta, c.paired_cases);
            }
            if (too_many_undefined(result) || (other && too_many_undefined(*other))) {
                std::fprintf(stderr, "more than 10%% of cases have undefined metrics\n");
                return kExitUndefined;
            }
            return 0;
        }

        if (*scenario) {
            geodss::SessionConfig base;
            base.ensemble_size = ensemble;
            base.gamma = gamma;
            base.seeds = {geodss::derive_seed(seed, 0, 1), geodss::derive_seed(seed, 0, 2), geodss::derive_seed(seed, 0, 3)};
            const auto report = geodss::run_scenario(preset, base, std::filesystem::path(out_dir));
            std::printf("%s: landed=%s relative=%.2f%% steps=%d\n", preset.c_str(),
                        geodss::to_string(report.metrics.landed_layer), report.metrics.relative, report.steps);
            if (report.reweight_step)
                std::printf("reweighted at step %d: cdf mean %.4f -> %.4f\n", *report.reweight_step,
                            report.cdf_mean_before, report.cdf_mean_after);
            return 0;
        }

        if (*serve) {
            geodss::ServerOptions options;
            options.host = host;
            options.port = port_opt->count() > 0 ? port : geodss::port_from_env(8080);
            if (!snapshots.empty()) options.snapshot_dir = snapshots;
            geodss::SessionHost sessions(options.snapshot_dir);
            geodss::DssServer server(sessions, options);
            g_server = &server;
            std::signal(SIGINT, [](int) {
                if (g_server) g_server->stop();
            });
            std::signal(SIGTERM, [](int) {
                if (g_server) g_server->stop();
            });
            const int bound = server.start();
            std::printf("serving on http://%s:%d\n", host.c_str(), bound);
            std::fflush(stdout);
            server.run();
            g_server = nullptr;
            return 0;
        }
    } catch (const geodss::ArgumentError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitArguments;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
