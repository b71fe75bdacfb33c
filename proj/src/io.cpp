#include "geodss/io.hpp"

#include "geodss/errors.hpp"

#include <fstream>

namespace geodss {

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

const char* direction_name(ChannelDirection d) { return d == ChannelDirection::up ? "up" : "down"; }

const char* kind_name(Decision::Kind k) {
    switch (k) {
    case Decision::Kind::accept: return "accept";
    case Decision::Kind::steer: return "steer";
    case Decision::Kind::stop: return "stop";
    }
    return "?";
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ArgumentError(path.string() + ": " + e.what());
    }
}

} // namespace

void to_json(json& j, const Interval& v) { j = json{{"min", v.min}, {"max", v.max}}; }

void from_json(const json& j, Interval& v) {
    if (j.is_array()) {
        if (j.size() != 2) throw ArgumentError("interval needs two numbers");
        v = {j[0].get<double>(), j[1].get<double>()};
        return;
    }
    v.min = j.at("min").get<double>();
    v.max = j.at("max").get<double>();
}

void to_json(json& j, const GeostatParams& v) {
    j = json{{"boundary_means", v.boundary_means},
             {"sill", v.sill},
             {"range", v.range},
             {"nugget", v.nugget},
             {"adjacent_correlation", v.adjacent_correlation},
             {"knot_spacing", v.knot_spacing},
             {"x_extent", v.x_extent},
             {"layer_resistivities", v.layer_resistivities}};
}

void from_json(const json& j, GeostatParams& v) {
    read_opt(j, "boundary_means", v.boundary_means);
    read_opt(j, "sill", v.sill);
    read_opt(j, "range", v.range);
    read_opt(j, "nugget", v.nugget);
    read_opt(j, "adjacent_correlation", v.adjacent_correlation);
    read_opt(j, "knot_spacing", v.knot_spacing);
    read_opt(j, "x_extent", v.x_extent);
    read_opt(j, "layer_resistivities", v.layer_resistivities);
}

void to_json(json& j, const EarthRealization& v) {
    j = json{{"knots_x", v.knots_x()},
             {"boundary_depths", v.boundary_depths()},
             {"layer_resistivities", v.layer_resistivities()}};
}

void from_json(const json& j, EarthRealization& v) {
    v = EarthRealization(j.at("knots_x").get<std::vector<double>>(),
                         j.at("boundary_depths").get<std::vector<std::vector<double>>>(),
                         j.at("layer_resistivities").get<std::vector<double>>());
}

void to_json(json& j, const Ensemble& v) { j = json{{"members", v.members()}, {"weights", v.weights()}}; }

void from_json(const json& j, Ensemble& v) {
    auto members = j.at("members").get<std::vector<EarthRealization>>();
    std::vector<double> weights;
    read_opt(j, "weights", weights);
    v = Ensemble(std::move(members), std::move(weights));
}

void to_json(json& j, const ToolSpec& v) {
    json channels = json::array();
    for (const auto& c : v.channels) channels.push_back({{"direction", direction_name(c.direction)}, {"kernel", "triangular"}});
    j = json{{"doi", v.doi}, {"channels", channels}, {"noise_variance", v.noise_variance}};
}

void from_json(const json& j, ToolSpec& v) {
    read_opt(j, "doi", v.doi);
    read_opt(j, "noise_variance", v.noise_variance);
    if (auto it = j.find("channels"); it != j.end()) {
        v.channels.clear();
        for (const auto& c : *it) {
            const std::string dir = c.at("direction").get<std::string>();
            if (dir != "up" && dir != "down") throw ArgumentError("channel direction must be up or down");
            if (c.contains("kernel") && c.at("kernel").get<std::string>() != "triangular")
                throw ArgumentError("only the triangular kernel is supported");
            v.channels.push_back({dir == "up" ? ChannelDirection::up : ChannelDirection::down});
        }
    }
}

void to_json(json& j, const Station& v) { j = json{{"x", v.x}, {"z", v.z}}; }

void from_json(const json& j, Station& v) {
    v.x = j.at("x").get<double>();
    v.z = j.at("z").get<double>();
}

void to_json(json& j, const MeasurementVector& v) { j = json{{"station", v.station}, {"values", v.values}}; }

void from_json(const json& j, MeasurementVector& v) {
    v.station = j.at("station").get<Station>();
    v.values = j.at("values").get<std::vector<double>>();
}

void to_json(json& j, const AssimilationDiagnostics& v) {
    j = json{{"station", v.station},
             {"rms_before", v.rms_before},
             {"rms_after", v.rms_after},
             {"gain_frobenius", v.gain_frobenius}};
}

void to_json(json& j, const Point& v) { j = json::array({v.x, v.z}); }

void from_json(const json& j, Point& v) {
    if (j.is_array()) {
        v = {j.at(0).get<double>(), j.at(1).get<double>()};
    } else {
        v = {j.at("x").get<double>(), j.at("z").get<double>()};
    }
}

void to_json(json& j, const ObjectiveWeights& v) {
    j = json{{"w_position", v.w_position}, {"w_sand", v.w_sand}, {"w_cost", v.w_cost}};
}

void from_json(const json& j, ObjectiveWeights& v) {
    read_opt(j, "w_position", v.w_position);
    read_opt(j, "w_sand", v.w_sand);
    read_opt(j, "w_cost", v.w_cost);
}

void to_json(json& j, const Constraints& v) {
    j = json{{"max_dogleg", v.max_dogleg}, {"max_inclination", v.max_inclination}};
}

void from_json(const json& j, Constraints& v) {
    read_opt(j, "max_dogleg", v.max_dogleg);
    read_opt(j, "max_inclination", v.max_inclination);
}

void to_json(json& j, const Recommendation& v) {
    j = json{{"action", to_string(v.action)}, {"expected_value", v.expected_value}};
    if (v.action == Action::steer) {
        j["target_z"] = v.target_z;
        j["inclination_deg"] = v.inclination_deg;
    }
    json alts = json::array();
    for (const auto& a : v.alternatives)
        alts.push_back({{"target_z", a.target_z}, {"inclination_deg", a.inclination_deg}, {"expected_value", a.expected_value}});
    j["alternatives"] = std::move(alts);
}

void to_json(json& j, const Seeds& v) { j = json{{"ensemble", v.ensemble}, {"truth", v.truth}, {"noise", v.noise}}; }

void from_json(const json& j, Seeds& v) {
    read_opt(j, "ensemble", v.ensemble);
    read_opt(j, "truth", v.truth);
    read_opt(j, "noise", v.noise);
}

void to_json(json& j, const SessionConfig& v) {
    j = json{{"geostat", v.geostat},
             {"tool", v.tool},
             {"weights", v.weights},
             {"constraints", v.constraints},
             {"gamma", v.gamma},
             {"ensemble_size", v.ensemble_size},
             {"horizontal_length", v.horizontal_length},
             {"start_height", v.start_height},
             {"start_inclination", v.start_inclination},
             {"seeds", v.seeds},
             {"quadrature_cells", v.quadrature.base_cells},
             {"assimilate", v.assimilate},
             {"perfect_information", v.perfect_information}};
    if (v.truth) j["truth"] = *v.truth;
}

void from_json(const json& j, SessionConfig& v) {
    if (!j.is_object()) throw ArgumentError("session config must be a JSON object");
    read_opt(j, "geostat", v.geostat);
    read_opt(j, "tool", v.tool);
    read_opt(j, "weights", v.weights);
    read_opt(j, "constraints", v.constraints);
    read_opt(j, "gamma", v.gamma);
    if (auto it = j.find("ensemble_size"); it != j.end()) {
        const auto n = it->get<long long>();
        if (n < 0) throw ArgumentError("ensemble_size must be >= 2");
        v.ensemble_size = static_cast<std::size_t>(n);
    }
    read_opt(j, "horizontal_length", v.horizontal_length);
    read_opt(j, "start_height", v.start_height);
    read_opt(j, "start_inclination", v.start_inclination);
    read_opt(j, "seeds", v.seeds);
    read_opt(j, "quadrature_cells", v.quadrature.base_cells);
    read_opt(j, "assimilate", v.assimilate);
    read_opt(j, "perfect_information", v.perfect_information);
    if (auto it = j.find("preset"); it != j.end() && !it->is_null()) {
        v.truth = load_preset_truth(it->get<std::string>());
    }
    if (auto it = j.find("truth"); it != j.end() && !it->is_null()) v.truth = it->get<EarthRealization>();
}

void to_json(json& j, const Decision& v) {
    j = json{{"action", kind_name(v.kind)}};
    if (v.kind == Decision::Kind::steer) j["target_z"] = v.target_z;
}

void from_json(const json& j, Decision& v) {
    const std::string action = j.at("action").get<std::string>();
    if (action == "accept") {
        v = Decision::accept();
    } else if (action == "stop") {
        v = Decision::stop();
    } else if (action == "steer") {
        v = Decision::steer(j.at("target_z").get<double>());
    } else {
        throw ArgumentError("decision action must be accept, steer or stop");
    }
}

void to_json(json& j, const Mutation& v) {
    if (v.kind == Mutation::Kind::weights) {
        j = json{{"type", "weights"}, {"weights", v.weights}};
    } else {
        j = json{{"type", "step"}};
        if (v.decision) j["decision"] = *v.decision;
    }
}

void from_json(const json& j, Mutation& v) {
    const std::string type = j.at("type").get<std::string>();
    v = Mutation{};
    if (type == "weights") {
        v.kind = Mutation::Kind::weights;
        v.weights = j.at("weights").get<ObjectiveWeights>();
    } else if (type == "step") {
        v.kind = Mutation::Kind::step;
        if (auto it = j.find("decision"); it != j.end() && !it->is_null()) v.decision = it->get<Decision>();
    } else {
        throw ArgumentError("unknown mutation type " + type);
    }
}

void to_json(json& j, const StepRecord& v) {
    j = json{{"step", v.step},
             {"action", to_string(v.action)},
             {"target_z", v.target_z},
             {"inclination_deg", v.inclination_deg},
             {"decided_by", v.human ? "human" : "auto"}};
    if (v.measurement) j["measurement"] = *v.measurement;
    if (v.diagnostics) j["diagnostics"] = *v.diagnostics;
}

void to_json(json& j, const CaseMetrics& v) {
    j = json{{"achieved_value", v.achieved_value},
             {"theoretical_max", v.theoretical_max},
             {"relative", v.defined ? json(v.relative) : json(nullptr)},
             {"defined", v.defined},
             {"landed_layer", to_string(v.landed_layer)},
             {"optimal_layer", to_string(v.optimal_layer)},
             {"landing_optimal", v.landing_optimal},
             {"stands_in_target", v.stands_in_target}};
}

SessionConfig parse_session_config(const json& j) {
    SessionConfig config;
    try {
        config = j.get<SessionConfig>();
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("invalid session config: ") + e.what());
    }
    config.validate();
    return config;
}

json trajectory_json(const std::vector<Point>& trajectory) {
    json out = json::array();
    for (const auto& p : trajectory) out.push_back(json::array({p.x, p.z}));
    return out;
}

std::filesystem::path fixture_dir() {
    if (const char* env = std::getenv("GEODSS_FIXTURES")) return env;
    return GEODSS_FIXTURE_DIR;
}

EarthRealization load_preset_truth(const std::string& name) {
    const auto path = fixture_dir() / "scenarios" / (name + ".json");
    if (name.empty() || name.find_first_of("/\\.") != std::string::npos || !std::filesystem::exists(path))
        throw ArgumentError("unknown scenario preset '" + name + "'");
    const json j = read_json_file(path);
    if (auto it = j.find("truth_preset"); it != j.end()) return load_preset_truth(it->get<std::string>());
    try {
        return j.at("truth").get<EarthRealization>();
    } catch (const json::exception& e) {
        throw ArgumentError(path.string() + ": " + e.what());
    }
}

json session_snapshot(const SteeringSession& session) {
    return json{{"config", session.config()}, {"mutations", session.mutations()}};
}

SteeringSession load_snapshot(const json& snapshot) {
    std::vector<Mutation> mutations;
    try {
        mutations = snapshot.at("mutations").get<std::vector<Mutation>>();
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("invalid snapshot: ") + e.what());
    }
    return replay_session(parse_session_config(snapshot.at("config")), mutations);
}

} // namespace geodss
