/**
 * @file bench.hpp
 * @brief Seeded multi-case benchmark and scripted scenario replays.
 */
#pragma once

#include "geodss/io.hpp"
#include "geodss/steering.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace geodss {

/// Seeds of case `index`: derive_seed(master, index, s) for streams
/// s = 1 (ensemble), 2 (truth), 3 (noise).
Seeds case_seeds(std::uint64_t master, std::size_t index);

struct CaseRow {
    std::size_t index = 0;
    Seeds seeds;
    CaseMetrics metrics;
    int stands_drilled = 0;
    SessionStatus status = SessionStatus::completed;
};

/// Bins [0,10), [10,20), ..., [90,100]; values outside [0, 100] are counted
/// separately.
struct Histogram {
    std::array<int, 10> counts{};
    std::array<int, 10> landed_top{};
    std::array<int, 10> landed_bottom{};
    std::array<int, 10> landed_none{};
    int below_zero = 0;
    int above_hundred = 0;
};

struct BenchAggregate {
    std::size_t cases = 0;
    std::size_t defined = 0;
    std::size_t undefined = 0;
    double mean_relative = 0.0;         // over defined cases, %
    double landing_optimal_rate = 0.0;  // over defined cases, %
    double min_relative = 0.0;
    double max_relative = 0.0;
    Histogram histogram;
};

struct BenchResult {
    std::size_t ensemble_size = 0;
    double gamma = 1.0;
    std::uint64_t seed = 0;
    std::vector<CaseRow> rows;
    BenchAggregate aggregate;
};

/// Runs `cases` fully automatic sessions; case i uses case_seeds(seed, i)
/// with the rest of `base`. Rows are in case order.
BenchResult run_bench(std::size_t cases, const SessionConfig& base, double gamma, std::uint64_t seed);

/// Aggregates over rows; cases with undefined metrics are excluded and counted.
BenchAggregate aggregate_rows(const std::vector<CaseRow>& rows);

/// Per-case row for one session, evaluated against its truth.
CaseRow run_case(std::size_t index, const SessionConfig& config);

void write_bench_csv(std::ostream& out, const BenchResult& result);
/// Rows parsed back from write_bench_csv output.
std::vector<CaseRow> read_bench_csv(std::istream& in);

struct PairedComparison {
    double gamma_a = 1.0;
    double gamma_b = 1.0;
    std::size_t paired_cases = 0;  // defined in both runs
    double mean_a = 0.0;
    double mean_b = 0.0;
    double mean_delta = 0.0;  // mean of (b - a) over paired cases
};

PairedComparison compare_runs(const BenchResult& a, const BenchResult& b);

json bench_json(const BenchResult& result, const std::optional<BenchResult>& comparison = std::nullopt);

struct ScenarioReport {
    std::string preset;
    CaseMetrics metrics;
    int steps = 0;
    /// reweight_midrun only: step at which the weights changed and the
    /// expected-value CDF mean just before and after.
    std::optional<int> reweight_step;
    double cdf_mean_before = 0.0;
    double cdf_mean_after = 0.0;
    double expected_before = 0.0;
    double expected_after = 0.0;
    double initial_inclination_target = 0.0;
    std::vector<StepRecord> history;
};

/// Known preset names.
const std::vector<std::string>& scenario_presets();

/// Runs a preset (truth from fixtures, automatic decisions). With
/// `out_dir`, writes frames/frame_NNN.json (state views), report.json and
/// measurements.csv there.
ScenarioReport run_scenario(const std::string& preset, const SessionConfig& base,
                            const std::optional<std::filesystem::path>& out_dir = std::nullopt);

json to_json_value(const ScenarioReport& report);

} // namespace geodss
