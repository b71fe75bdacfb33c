#include "geodss/bench.hpp"

#include "geodss/errors.hpp"
#include "geodss/parallel.hpp"
#include "geodss/random.hpp"
#include "geodss/view.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace geodss {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

LandedLayer parse_layer(const std::string& s) {
    if (s == "top") return LandedLayer::top;
    if (s == "bottom") return LandedLayer::bottom;
    if (s == "none") return LandedLayer::none;
    throw ArgumentError("unknown landed layer '" + s + "'");
}

SessionStatus parse_status(const std::string& s) {
    if (s == "STOPPED") return SessionStatus::stopped;
    if (s == "COMPLETED") return SessionStatus::completed;
    if (s == "DRILLING") return SessionStatus::drilling;
    throw ArgumentError("unknown status '" + s + "'");
}

json read_preset_file(const std::string& name) {
    const auto& names = scenario_presets();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw ArgumentError("unknown scenario preset '" + name + "'");
    std::ifstream in(fixture_dir() / "scenarios" / (name + ".json"));
    if (!in) throw ArgumentError("missing fixture for preset '" + name + "'");
    return json::parse(in);
}

} // namespace

Seeds case_seeds(std::uint64_t master, std::size_t index) {
    return {derive_seed(master, index, 1), derive_seed(master, index, 2), derive_seed(master, index, 3)};
}

CaseRow run_case(std::size_t index, const SessionConfig& config) {
    SteeringSession session(config);
    while (session.status() == SessionStatus::drilling) session.step();
    CaseRow row;
    row.index = index;
    row.seeds = config.seeds;
    row.metrics = session.evaluate_case();
    row.stands_drilled = static_cast<int>(session.drilled().size()) - 1;
    row.status = session.status();
    return row;
}

BenchResult run_bench(std::size_t cases, const SessionConfig& base, double gamma, std::uint64_t seed) {
    if (cases < 1) throw ArgumentError("cases must be >= 1");
    BenchResult result;
    result.ensemble_size = base.ensemble_size;
    result.gamma = gamma;
    result.seed = seed;
    result.rows.resize(cases);
    parallel_for(cases, [&](std::size_t i) {
        SessionConfig config = base;
        config.gamma = gamma;
        config.seeds = case_seeds(seed, i);
        result.rows[i] = run_case(i, config);
    });
    result.aggregate = aggregate_rows(result.rows);
    return result;
}

BenchAggregate aggregate_rows(const std::vector<CaseRow>& rows) {
    BenchAggregate agg;
    agg.cases = rows.size();
    double sum = 0.0;
    std::size_t optimal = 0;
    bool first = true;
    for (const auto& row : rows) {
        const auto& m = row.metrics;
        if (!m.defined) {
            ++agg.undefined;
            continue;
        }
        ++agg.defined;
        sum += m.relative;
        if (m.landing_optimal) ++optimal;
        agg.min_relative = first ? m.relative : std::min(agg.min_relative, m.relative);
        agg.max_relative = first ? m.relative : std::max(agg.max_relative, m.relative);
        first = false;

        auto& h = agg.histogram;
        if (m.relative < 0.0) {
            ++h.below_zero;
            continue;
        }
        if (m.relative > 100.0) {
            ++h.above_hundred;
            continue;
        }
        const auto bin = std::min<std::size_t>(static_cast<std::size_t>(m.relative / 10.0), 9);
        ++h.counts[bin];
        switch (m.landed_layer) {
        case LandedLayer::top: ++h.landed_top[bin]; break;
        case LandedLayer::bottom: ++h.landed_bottom[bin]; break;
        case LandedLayer::none: ++h.landed_none[bin]; break;
        }
    }
    if (agg.defined > 0) {
        agg.mean_relative = sum / static_cast<double>(agg.defined);
        agg.landing_optimal_rate = 100.0 * static_cast<double>(optimal) / static_cast<double>(agg.defined);
    } else {
        agg.mean_relative = std::nan("");
        agg.landing_optimal_rate = std::nan("");
    }
    return agg;
}

void write_bench_csv(std::ostream& out, const BenchResult& result) {
    out << "# geodss bench\n";
    out << "# seed_mixing=splitmix64 case_seed(stream)=mix64(mix64(mix64(seed)^case)^stream) "
           "streams: ensemble=1 truth=2 noise=3\n";
    out << "# cases=" << result.rows.size() << " ensemble=" << result.ensemble_size << " gamma=" << num(result.gamma)
        << " seed=" << result.seed << "\n";
    out << "case,seed_ensemble,seed_truth,seed_noise,status,stands,achieved_value,theoretical_max,relative,defined,"
           "landed_layer,optimal_layer,landing_optimal,stands_in_target\n";
    for (const auto& r : result.rows) {
        const auto& m = r.metrics;
        out << r.index << ',' << r.seeds.ensemble << ',' << r.seeds.truth << ',' << r.seeds.noise << ','
            << to_string(r.status) << ',' << r.stands_drilled << ',' << num(m.achieved_value) << ','
            << num(m.theoretical_max) << ',' << (m.defined ? num(m.relative) : std::string("nan")) << ','
            << (m.defined ? 1 : 0) << ',' << to_string(m.landed_layer) << ',' << to_string(m.optimal_layer) << ','
            << (m.landing_optimal ? 1 : 0) << ',' << m.stands_in_target << '\n';
    }
    const auto& a = result.aggregate;
    out << "# mean_relative=" << num(a.mean_relative) << " landing_optimal_rate=" << num(a.landing_optimal_rate)
        << " defined=" << a.defined << " undefined=" << a.undefined << "\n";
}

std::vector<CaseRow> read_bench_csv(std::istream& in) {
    std::vector<CaseRow> rows;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 14) throw ArgumentError("bench CSV row has " + std::to_string(f.size()) + " fields");
        CaseRow r;
        r.index = std::stoull(f[0]);
        r.seeds = {std::stoull(f[1]), std::stoull(f[2]), std::stoull(f[3])};
        r.status = parse_status(f[4]);
        r.stands_drilled = std::stoi(f[5]);
        r.metrics.achieved_value = std::strtod(f[6].c_str(), nullptr);
        r.metrics.theoretical_max = std::strtod(f[7].c_str(), nullptr);
        r.metrics.relative = std::strtod(f[8].c_str(), nullptr);
        r.metrics.defined = f[9] == "1";
        r.metrics.landed_layer = parse_layer(f[10]);
        r.metrics.optimal_layer = parse_layer(f[11]);
        r.metrics.landing_optimal = f[12] == "1";
        r.metrics.stands_in_target = std::stoi(f[13]);
        rows.push_back(r);
    }
    return rows;
}

PairedComparison compare_runs(const BenchResult& a, const BenchResult& b) {
    if (a.rows.size() != b.rows.size()) throw ArgumentError("paired runs differ in case count");
    PairedComparison c;
    c.gamma_a = a.gamma;
    c.gamma_b = b.gamma;
    double sa = 0.0;
    double sb = 0.0;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto& ma = a.rows[i].metrics;
        const auto& mb = b.rows[i].metrics;
        if (!ma.defined || !mb.defined) continue;
        ++c.paired_cases;
        sa += ma.relative;
        sb += mb.relative;
    }
    if (c.paired_cases > 0) {
        const double n = static_cast<double>(c.paired_cases);
        c.mean_a = sa / n;
        c.mean_b = sb / n;
        c.mean_delta = c.mean_b - c.mean_a;
    }
    return c;
}

namespace {

json aggregate_json(const BenchAggregate& a) {
    json bins = json::array();
    for (std::size_t b = 0; b < 10; ++b) {
        const std::string label = "[" + std::to_string(b * 10) + "," + std::to_string(b * 10 + 10) + (b == 9 ? "]" : ")");
        bins.push_back({{"bin", label},
                        {"count", a.histogram.counts[b]},
                        {"landed_top", a.histogram.landed_top[b]},
                        {"landed_bottom", a.histogram.landed_bottom[b]},
                        {"landed_none", a.histogram.landed_none[b]}});
    }
    auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return json{{"cases", a.cases},
                {"defined", a.defined},
                {"undefined", a.undefined},
                {"mean_relative", finite_or_null(a.mean_relative)},
                {"landing_optimal_rate", finite_or_null(a.landing_optimal_rate)},
                {"min_relative", a.min_relative},
                {"max_relative", a.max_relative},
                {"histogram", bins},
                {"below_zero", a.histogram.below_zero},
                {"above_hundred", a.histogram.above_hundred}};
}

json run_json(const BenchResult& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"case", row.index},
                        {"seeds", row.seeds},
                        {"status", to_string(row.status)},
                        {"stands", row.stands_drilled},
                        {"metrics", row.metrics}});
    return json{{"gamma", r.gamma},
                {"seed", r.seed},
                {"ensemble", r.ensemble_size},
                {"seed_mixing", "splitmix64"},
                {"aggregate", aggregate_json(r.aggregate)},
                {"cases", rows}};
}

} // namespace

json bench_json(const BenchResult& result, const std::optional<BenchResult>& comparison) {
    json j = run_json(result);
    if (comparison) {
        const PairedComparison c = compare_runs(result, *comparison);
        j["comparison"] = run_json(*comparison);
        j["paired"] = {{"gamma_a", c.gamma_a},
                       {"gamma_b", c.gamma_b},
                       {"paired_cases", c.paired_cases},
                       {"mean_a", c.mean_a},
                       {"mean_b", c.mean_b},
                       {"mean_delta", c.mean_delta}};
    }
    return j;
}

const std::vector<std::string>& scenario_presets() {
    static const std::vector<std::string> names{"top_thicker", "bottom_thicker", "reweight_midrun"};
    return names;
}

ScenarioReport run_scenario(const std::string& preset, const SessionConfig& base,
                            const std::optional<std::filesystem::path>& out_dir) {
    const json spec = read_preset_file(preset);
    SessionConfig config = base;
    config.truth = load_preset_truth(preset);

    std::optional<ObjectiveWeights> reweight;
    if (auto it = spec.find("reweight"); it != spec.end()) reweight = it->at("weights").get<ObjectiveWeights>();

    if (out_dir) std::filesystem::create_directories(*out_dir / "frames");
    std::uint64_t version = 1;
    auto dump_frame = [&](const SteeringSession& s) {
        if (!out_dir) return;
        char name[32];
        std::snprintf(name, sizeof name, "frame_%03llu.json", static_cast<unsigned long long>(version));
        std::ofstream out(*out_dir / "frames" / name);
        out << state_view(s, version).dump();
    };

    SteeringSession session(config);
    ScenarioReport report;
    report.preset = preset;
    report.initial_inclination_target = session.recommendation().inclination_deg;
    dump_frame(session);

    while (session.status() == SessionStatus::drilling) {
        if (reweight && !report.reweight_step) {
            const auto& g = session.grid();
            const auto& bit = session.bit();
            const LayerInfo here = layer_query(session.truth(), g.x(bit.k), g.z(bit.z_index));
            if (here.in_reservoir && here.sand_ordinal == 0) {
                report.reweight_step = static_cast<int>(session.history().size());
                report.cdf_mean_before = value_cdf(session).mean;
                report.expected_before = session.recommendation().expected_value;
                session.set_weights(*reweight);
                report.cdf_mean_after = value_cdf(session).mean;
                report.expected_after = session.recommendation().expected_value;
                ++version;
                dump_frame(session);
            }
        }
        session.step();
        ++version;
        dump_frame(session);
    }
    report.metrics = session.evaluate_case();
    report.steps = static_cast<int>(session.history().size());
    report.history = session.history();

    if (out_dir) {
        std::ofstream(*out_dir / "report.json") << to_json_value(report).dump(2) << '\n';
        std::ofstream csv(*out_dir / "measurements.csv");
        write_measurements_csv(csv, session.measurement_log(), config.tool);
    }
    return report;
}

json to_json_value(const ScenarioReport& r) {
    json j{{"preset", r.preset},
           {"metrics", r.metrics},
           {"steps", r.steps},
           {"initial_inclination_target", r.initial_inclination_target},
           {"history", r.history}};
    if (r.reweight_step) {
        j["reweight"] = {{"step", *r.reweight_step},
                         {"cdf_mean_before", r.cdf_mean_before},
                         {"cdf_mean_after", r.cdf_mean_after},
                         {"expected_before", r.expected_before},
                         {"expected_after", r.expected_after}};
    }
    return j;
}

} // namespace geodss
