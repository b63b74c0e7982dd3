#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "feederopt/battery.hpp"
#include "feederopt/errors.hpp"
#include "feederopt/ieee33.hpp"
#include "feederopt/objective.hpp"
#include "feederopt/profiles.hpp"
#include "feederopt/pso.hpp"
#include "feederopt/scenario.hpp"

#include <nlohmann/json.hpp>

namespace feederopt {

// Full run configuration: INI-style file with [section] key = value lines,
// overridable by CLI flags (flags win). Unknown keys are rejected.
struct RunConfig {
    // [network]
    std::string network = "ieee33"; // builtin name, or "csv" with the paths below
    std::string buses_csv;
    std::string lines_csv;
    std::string sectors_csv; // optional; default sector map when empty
    double base_kv = ieee33::kDefaultBaseKv;
    double base_mva = ieee33::kDefaultBaseMva;
    int sector_count = 7;
    int residences_per_bus = ieee33::kResidencesPerBus;

    // [profiles]
    std::string profiles = "synthetic"; // or "csv"
    std::string profiles_csv;
    std::string solar_csv;
    std::string residential_shape = "double_peak";
    double solar_peak_kw = 10.0;
    double ev_charger_kw = 7.0;
    int ev_session_hours = 2;
    int ev_vehicles_per_bus = 10;

    // [battery]
    BatteryParams battery;

    // [objective]
    ObjectiveWeights weights;

    // [swarm]
    SwarmConfig swarm;

    // [scenario] / [sweep]
    std::string scenario = "proposed";
    double alpha = 0.7;
    double beta = 0.3;
    std::vector<double> sweep_alphas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<double> sweep_betas = {0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30};
    std::vector<int> trajectory_buses = {18, 33};
    double voltage_band = 0.10;

    // [run]
    std::uint64_t seed = 1;
    std::string out_dir = "out";

    static RunConfig from_file(const std::filesystem::path& path) {
        RunConfig cfg;
        cfg.apply_file(path);
        return cfg;
    }

    void apply_file(const std::filesystem::path& path);
    void validate() const;
    nlohmann::json to_json() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const char* ws = " \t\r";
    auto b = s.find_first_not_of(ws);
    if (b == std::string::npos)
        return {};
    auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

// "section.key" -> value
inline std::map<std::string, std::string> parse_ini(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file: " + path.string());
    std::map<std::string, std::string> out;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // inline comments: a # or ; preceded by whitespace
        for (std::size_t i = 0; i < line.size(); ++i) {
            if ((line[i] == '#' || line[i] == ';') &&
                (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line.erase(i);
                break;
            }
        }
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';')
            continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": empty key");
        out[section.empty() ? key : section + "." + key] = value;
    }
    return out;
}

inline double to_double(const std::string& key, const std::string& v) {
    double d = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError(key + ": not a number: '" + v + "'");
    return d;
}

inline long long to_int(const std::string& key, const std::string& v) {
    long long i = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError(key + ": not an integer: '" + v + "'");
    return i;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError(key + ": not a boolean: '" + v + "'");
}

template <typename T, typename Conv>
std::vector<T> to_list(const std::string& key, const std::string& v, Conv conv) {
    std::vector<T> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty())
            out.push_back(static_cast<T>(conv(key, item)));
    }
    if (out.empty())
        throw ConfigError(key + ": empty list");
    return out;
}

} // namespace detail

inline void RunConfig::apply_file(const std::filesystem::path& path) {
    using detail::to_bool;
    using detail::to_double;
    using detail::to_int;
    for (const auto& [key, v] : detail::parse_ini(path)) {
        if (key == "network.source") network = v;
        else if (key == "network.buses_csv") buses_csv = v;
        else if (key == "network.lines_csv") lines_csv = v;
        else if (key == "network.sectors_csv") sectors_csv = v;
        else if (key == "network.base_kv") base_kv = to_double(key, v);
        else if (key == "network.base_mva") base_mva = to_double(key, v);
        else if (key == "network.sector_count") sector_count = static_cast<int>(to_int(key, v));
        else if (key == "network.residences_per_bus") residences_per_bus = static_cast<int>(to_int(key, v));
        else if (key == "profiles.source") profiles = v;
        else if (key == "profiles.profiles_csv") profiles_csv = v;
        else if (key == "profiles.solar_csv") solar_csv = v;
        else if (key == "profiles.residential_shape") residential_shape = v;
        else if (key == "profiles.solar_peak_kw") solar_peak_kw = to_double(key, v);
        else if (key == "profiles.ev_charger_kw") ev_charger_kw = to_double(key, v);
        else if (key == "profiles.ev_session_hours") ev_session_hours = static_cast<int>(to_int(key, v));
        else if (key == "profiles.ev_vehicles_per_bus") ev_vehicles_per_bus = static_cast<int>(to_int(key, v));
        else if (key == "battery.beta") battery.beta = to_double(key, v);
        else if (key == "battery.e_bt_user_kwh") battery.e_bt_user_kwh = to_double(key, v);
        else if (key == "battery.p_max_kw_per_home") battery.p_max_kw_per_home = to_double(key, v);
        else if (key == "battery.soc_init_pct") battery.soc_init_pct = to_double(key, v);
        else if (key == "battery.capacity_from_all_homes") battery.capacity_from_all_homes = to_bool(key, v);
        else if (key == "battery.roundtrip_efficiency") battery.roundtrip_efficiency = to_double(key, v);
        else if (key == "objective.w1") weights.w1 = to_double(key, v);
        else if (key == "objective.w2") weights.w2 = to_double(key, v);
        else if (key == "objective.normalized") weights.normalized = to_bool(key, v);
        else if (key == "objective.penalty_coeff") weights.penalty_coeff = to_double(key, v);
        else if (key == "objective.unconverged_hour_penalty") weights.unconverged_hour_penalty = to_double(key, v);
        else if (key == "swarm.particles") swarm.particles = static_cast<int>(to_int(key, v));
        else if (key == "swarm.iterations") swarm.iterations = static_cast<int>(to_int(key, v));
        else if (key == "swarm.inertia_w") swarm.inertia_w = to_double(key, v);
        else if (key == "swarm.c1") swarm.c1 = to_double(key, v);
        else if (key == "swarm.c2") swarm.c2 = to_double(key, v);
        else if (key == "swarm.v_max_frac") swarm.v_max_frac = to_double(key, v);
        else if (key == "swarm.stall_iters") swarm.stall_iters = static_cast<int>(to_int(key, v));
        else if (key == "swarm.threads") swarm.threads = static_cast<int>(to_int(key, v));
        else if (key == "swarm.progress") swarm.progress_to_stderr = to_bool(key, v);
        else if (key == "scenario.name") scenario = v;
        else if (key == "scenario.alpha") alpha = to_double(key, v);
        else if (key == "scenario.beta") beta = to_double(key, v);
        else if (key == "scenario.trajectory_buses")
            trajectory_buses = detail::to_list<int>(key, v, detail::to_int);
        else if (key == "scenario.voltage_band") voltage_band = to_double(key, v);
        else if (key == "sweep.alphas")
            sweep_alphas = detail::to_list<double>(key, v, detail::to_double);
        else if (key == "sweep.betas")
            sweep_betas = detail::to_list<double>(key, v, detail::to_double);
        else if (key == "run.seed") seed = static_cast<std::uint64_t>(to_int(key, v));
        else if (key == "run.out_dir") out_dir = v;
        else
            throw ConfigError(path.string() + ": unknown key '" + key + "'");
    }
}

inline void RunConfig::validate() const {
    if (network != "ieee33" && network != "csv")
        throw ConfigError("network.source must be 'ieee33' or 'csv'");
    if (network == "csv" && (buses_csv.empty() || lines_csv.empty()))
        throw ConfigError("network.source = csv requires buses_csv and lines_csv");
    if (base_kv <= 0.0 || base_mva <= 0.0)
        throw ConfigError("base_kv and base_mva must be positive");
    if (sector_count < 1)
        throw ConfigError("sector_count must be at least 1");
    if (residences_per_bus < 0)
        throw ConfigError("residences_per_bus must be non-negative");
    if (profiles != "synthetic" && profiles != "csv")
        throw ConfigError("profiles.source must be 'synthetic' or 'csv'");
    if (profiles == "csv" && (profiles_csv.empty() || solar_csv.empty()))
        throw ConfigError("profiles.source = csv requires profiles_csv and solar_csv");
    residential_shape_from_string(residential_shape);
    if (solar_peak_kw < 0.0)
        throw ConfigError("solar_peak_kw must be non-negative");
    if (ev_charger_kw < 0.0 || ev_session_hours < 0 || ev_vehicles_per_bus < 0)
        throw ConfigError("EV synthesis parameters must be non-negative");
    battery.validate();
    weights.validate();
    swarm.validate();
    scenario_kind_from_string(scenario);
    if (alpha < 0.0 || alpha > 1.0 || beta < 0.0 || beta > 1.0)
        throw ConfigError("alpha and beta must lie in [0, 1]");
    if (voltage_band <= 0.0 || voltage_band >= 1.0)
        throw ConfigError("voltage_band must lie in (0, 1)");
    for (const std::string& p : {buses_csv, lines_csv, sectors_csv, profiles_csv, solar_csv})
        if (!p.empty() && !std::filesystem::exists(p))
            throw ConfigError("referenced file does not exist: " + p);
}

inline nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["network"] = {{"source", network},      {"buses_csv", buses_csv},
                    {"lines_csv", lines_csv}, {"sectors_csv", sectors_csv},
                    {"base_kv", base_kv},     {"base_mva", base_mva},
                    {"sector_count", sector_count},
                    {"residences_per_bus", residences_per_bus}};
    j["profiles"] = {{"source", profiles},
                     {"profiles_csv", profiles_csv},
                     {"solar_csv", solar_csv},
                     {"residential_shape", residential_shape},
                     {"solar_peak_kw", solar_peak_kw},
                     {"ev_charger_kw", ev_charger_kw},
                     {"ev_session_hours", ev_session_hours},
                     {"ev_vehicles_per_bus", ev_vehicles_per_bus}};
    j["battery"] = {{"beta", battery.beta},
                    {"e_bt_user_kwh", battery.e_bt_user_kwh},
                    {"p_max_kw_per_home", battery.p_max_kw_per_home},
                    {"soc_init_pct", battery.soc_init_pct},
                    {"capacity_from_all_homes", battery.capacity_from_all_homes},
                    {"roundtrip_efficiency", battery.roundtrip_efficiency}};
    j["objective"] = {{"w1", weights.w1},
                      {"w2", weights.w2},
                      {"normalized", weights.normalized},
                      {"penalty_coeff", weights.penalty_coeff},
                      {"unconverged_hour_penalty", weights.unconverged_hour_penalty}};
    j["swarm"] = {{"particles", swarm.particles}, {"iterations", swarm.iterations},
                  {"inertia_w", swarm.inertia_w}, {"c1", swarm.c1},
                  {"c2", swarm.c2},               {"v_max_frac", swarm.v_max_frac},
                  {"stall_iters", swarm.stall_iters}, {"threads", swarm.threads}};
    j["scenario"] = {{"name", scenario},
                     {"alpha", alpha},
                     {"beta", beta},
                     {"trajectory_buses", trajectory_buses},
                     {"voltage_band", voltage_band}};
    j["sweep"] = {{"alphas", sweep_alphas}, {"betas", sweep_betas}};
    j["run"] = {{"seed", seed}, {"out_dir", out_dir}};
    return j;
}

// Materialized datasets for one run.
struct Workspace {
    RadialNetwork net;
    SectorMap sectors;
    HourlyProfileSet profiles;
};

inline Workspace build_workspace(const RunConfig& cfg) {
    cfg.validate();
    RadialNetwork net = cfg.network == "ieee33"
                            ? ieee33::network(cfg.base_kv, cfg.base_mva, cfg.residences_per_bus)
                            : RadialNetwork::from_csv(cfg.buses_csv, cfg.lines_csv, cfg.base_kv,
                                                      cfg.base_mva);
    SectorMap sectors = cfg.sectors_csv.empty()
                            ? SectorMap::default_map(net, cfg.sector_count)
                            : SectorMap::from_csv(net, cfg.sectors_csv, cfg.sector_count);
    HourlyProfileSet profiles;
    if (cfg.profiles == "csv") {
        profiles = load_profiles_csv(net, cfg.profiles_csv, cfg.solar_csv);
    } else {
        SyntheticProfileParams sp;
        sp.residential_shape = residential_shape_from_string(cfg.residential_shape);
        sp.solar_peak_kw = cfg.solar_peak_kw;
        sp.ev.charger_kw = cfg.ev_charger_kw;
        sp.ev.session_hours = cfg.ev_session_hours;
        sp.ev.vehicles_per_bus = cfg.ev_vehicles_per_bus;
        sp.ev.seed = cfg.seed;
        profiles = synth_profiles(net, sp);
    }
    return Workspace{std::move(net), std::move(sectors), std::move(profiles)};
}

inline ScenarioInputs make_inputs(const RunConfig& cfg, const Workspace& ws) {
    ScenarioInputs in;
    in.net = &ws.net;
    in.sectors = &ws.sectors;
    in.profiles = &ws.profiles;
    in.battery = cfg.battery;
    in.weights = cfg.weights;
    in.swarm = cfg.swarm;
    in.swarm.seed = cfg.seed;
    in.trajectory_buses = cfg.trajectory_buses;
    in.voltage_band = cfg.voltage_band;
    return in;
}

} // namespace feederopt
