#include "swarmsar/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "swarmsar/errors.hpp"

namespace sar {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Shortest decimal form that round-trips the exact double.
std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

struct Resolver {
    std::map<std::string, std::string> values;
    std::vector<std::string>& issues;

    bool has(const std::string& key) const { return values.count(key) != 0; }

    std::optional<double> number(const std::string& key) {
        auto it = values.find(key);
        if (it == values.end()) return std::nullopt;
        try {
            std::size_t pos = 0;
            double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            issues.push_back(key + ": expected a number, got '" + it->second + "'");
            return std::nullopt;
        }
    }

    void real(const std::string& key, double& target, double min_exclusive,
              bool allow_equal_min = false) {
        auto v = number(key);
        if (!v) return;
        bool ok = allow_equal_min ? *v >= min_exclusive : *v > min_exclusive;
        if (!ok) {
            issues.push_back(key + ": must be " + (allow_equal_min ? ">= " : "> ") +
                             format_double(min_exclusive) + ", got " + format_double(*v));
            return;
        }
        target = *v;
    }

    void real_any(const std::string& key, double& target) {
        auto v = number(key);
        if (v) target = *v;
    }

    void integer(const std::string& key, int& target, int min_value) {
        auto v = number(key);
        if (!v) return;
        if (*v != std::floor(*v)) {
            issues.push_back(key + ": expected an integer, got '" + values.at(key) + "'");
            return;
        }
        if (*v < min_value) {
            issues.push_back(key + ": must be >= " + std::to_string(min_value) + ", got " +
                             format_double(*v));
            return;
        }
        target = static_cast<int>(*v);
    }

    void text(const std::string& key, std::string& target) {
        auto it = values.find(key);
        if (it != values.end()) target = it->second;
    }

    void choice(const std::string& key, const std::vector<std::string>& allowed,
                const std::function<void(const std::string&)>& apply) {
        auto it = values.find(key);
        if (it == values.end()) return;
        if (std::find(allowed.begin(), allowed.end(), it->second) == allowed.end()) {
            std::string opts;
            for (const auto& a : allowed) opts += (opts.empty() ? "" : "|") + a;
            issues.push_back(key + ": expected one of " + opts + ", got '" + it->second + "'");
            return;
        }
        apply(it->second);
    }
};

std::vector<Vec2> parse_points_list(const std::string& key, const std::string& value,
                                    std::vector<std::string>& issues) {
    std::vector<Vec2> points;
    std::stringstream stream(value);
    std::string entry;
    while (std::getline(stream, entry, ';')) {
        entry = trim(entry);
        if (entry.empty()) continue;
        std::size_t comma = entry.find(',');
        if (comma == std::string::npos) {
            issues.push_back(key + ": expected 'x,y' pairs separated by ';', got '" + entry + "'");
            return {};
        }
        try {
            points.push_back(
                {std::stod(trim(entry.substr(0, comma))), std::stod(trim(entry.substr(comma + 1)))});
        } catch (const std::exception&) {
            issues.push_back(key + ": expected numbers in pair '" + entry + "'");
            return {};
        }
    }
    return points;
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "uav.count", "uav.speed_mps", "uav.detection_range_m", "uav.battery_mah",
        "uav.battery_voltage_v", "uav.power_base_w", "uav.power_flight_w_per_mps",
        "uav.power_llm_idle_w", "uav.power_llm_infer_w", "mission.command", "mission.launch_x_m",
        "mission.launch_y_m", "mission.cell_size_m", "mission.update_interval_s",
        "mission.dwell_time_s", "mission.inference_latency_s", "mission.mode", "planner.kind",
        "planner.lambda", "planner.balance_b", "planner.max_retries", "planner.url",
        "planner.model", "planner.timeout_s", "planner.max_transport_retries", "routing.kind",
        "routing.two_opt_passes", "fire.mask", "fire.synthetic.width_cells",
        "fire.synthetic.height_cells", "fire.synthetic.resolution_m",
        "fire.synthetic.origin_x_m", "fire.synthetic.origin_y_m", "fire.synthetic.ignition_x_m",
        "fire.synthetic.ignition_y_m", "fire.synthetic.radius_m", "fire.spread.probability",
        "fire.spread.neighborhood", "fire.spread.steps_per_update", "fire.updates", "sim.seed",
        "sim.dt_s", "output.frame_interval_s", "survivors",
    };
    return keys;
}

} // namespace

FireMask ScenarioConfig::initial_mask() const {
    if (!mask_path.empty()) return load_mask(mask_path);
    Vec2 center = synthetic.ignition_center.value_or(
        Vec2{synthetic.origin.x + synthetic.width_cells * synthetic.resolution_m / 2.0,
             synthetic.origin.y + synthetic.height_cells * synthetic.resolution_m / 2.0});
    return make_disk_mask(synthetic.width_cells, synthetic.height_cells, synthetic.resolution_m,
                          synthetic.origin, center, synthetic.radius_m);
}

KeyValues parse_key_values(const std::string& text) {
    KeyValues out;
    std::stringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("line " + std::to_string(line_no) + ": expected key = value, got '" +
                              line + "'");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

KeyValues load_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError("cannot open config file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_key_values(buffer.str());
}

ResolvedScenario resolve_scenario(const KeyValues& key_values) {
    ResolvedScenario resolved;
    auto& issues = resolved.issues;
    auto& config = resolved.config;

    Resolver r{{}, issues};
    for (const auto& [key, value] : key_values) {
        if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end()) {
            issues.push_back(key + ": unknown key");
            continue;
        }
        r.values[key] = value; // later entries override earlier ones
    }

    if (!r.has("uav.count")) issues.push_back("uav.count: required key is missing");
    r.integer("uav.count", config.uav_count, 1);
    r.real("uav.speed_mps", config.cruise_speed_mps, 0.0);
    r.real("uav.detection_range_m", config.detection_range_m, 0.0);
    r.real("uav.battery_mah", config.battery_capacity_mah, 0.0);
    r.real("uav.battery_voltage_v", config.battery_voltage_v, 0.0);
    r.real("uav.power_base_w", config.power_base_w, 0.0);
    r.real("uav.power_flight_w_per_mps", config.power_flight_w_per_mps, 0.0);
    r.real("uav.power_llm_idle_w", config.power_llm_idle_w, 0.0);
    r.real("uav.power_llm_infer_w", config.power_llm_infer_w, 0.0);

    r.text("mission.command", config.mission_command);
    r.real_any("mission.launch_x_m", config.launch_position.x);
    r.real_any("mission.launch_y_m", config.launch_position.y);
    r.real("mission.cell_size_m", config.cell_size_m, 0.0);
    r.real("mission.update_interval_s", config.update_interval_s, 0.0);
    r.real("mission.dwell_time_s", config.dwell_time_s, 0.0, true);
    r.real("mission.inference_latency_s", config.inference_latency_s, 0.0, true);
    r.choice("mission.mode", {"snapshot", "dynamic"}, [&](const std::string& v) {
        config.mode = v == "snapshot" ? SimMode::Snapshot : SimMode::Dynamic;
    });

    r.choice("planner.kind", {"greedy", "cluster", "remote"}, [&](const std::string& v) {
        config.planner = v == "greedy"    ? PlannerChoice::Greedy
                         : v == "cluster" ? PlannerChoice::Cluster
                                          : PlannerChoice::Remote;
    });
    r.real("planner.lambda", config.greedy.lambda, 0.0, true);
    r.real("planner.balance_b", config.greedy.balance_coefficient, 0.0, true);
    r.integer("planner.max_retries", config.max_retries, 0);
    r.text("planner.url", config.remote.url);
    r.text("planner.model", config.remote.model);
    r.real("planner.timeout_s", config.remote.timeout_s, 0.0);
    r.integer("planner.max_transport_retries", config.remote.max_transport_retries, 0);

    r.choice("routing.kind", {"nn2opt", "remote"}, [&](const std::string& v) {
        config.router = v == "nn2opt" ? RouterChoice::NnTwoOpt : RouterChoice::Remote;
    });
    r.integer("routing.two_opt_passes", config.two_opt_passes, 1);

    r.text("fire.mask", config.mask_path);
    r.integer("fire.synthetic.width_cells", config.synthetic.width_cells, 1);
    r.integer("fire.synthetic.height_cells", config.synthetic.height_cells, 1);
    r.real("fire.synthetic.resolution_m", config.synthetic.resolution_m, 0.0);
    r.real_any("fire.synthetic.origin_x_m", config.synthetic.origin.x);
    r.real_any("fire.synthetic.origin_y_m", config.synthetic.origin.y);
    if (r.has("fire.synthetic.ignition_x_m") || r.has("fire.synthetic.ignition_y_m")) {
        Vec2 ignition{};
        r.real_any("fire.synthetic.ignition_x_m", ignition.x);
        r.real_any("fire.synthetic.ignition_y_m", ignition.y);
        config.synthetic.ignition_center = ignition;
    }
    r.real("fire.synthetic.radius_m", config.synthetic.radius_m, 0.0);

    if (auto p = r.number("fire.spread.probability")) {
        if (*p < 0.0 || *p > 1.0)
            issues.push_back("fire.spread.probability: must be in [0,1], got " + format_double(*p));
        else
            config.spread.ignition_probability = *p;
    }
    r.choice("fire.spread.neighborhood", {"4", "8"}, [&](const std::string& v) {
        config.spread.neighborhood =
            v == "4" ? Neighborhood::FourConnected : Neighborhood::EightConnected;
    });
    r.integer("fire.spread.steps_per_update", config.spread.steps_per_update, 1);
    r.integer("fire.updates", config.updates, 1);

    if (auto v = r.number("sim.seed")) {
        if (*v < 0 || *v != std::floor(*v))
            issues.push_back("sim.seed: must be a non-negative integer");
        else
            config.seed = static_cast<std::uint64_t>(*v);
    }
    r.real("sim.dt_s", config.dt_s, 0.0);
    r.real("output.frame_interval_s", config.frame_interval_s, 0.0);
    if (r.has("survivors"))
        config.survivors = parse_points_list("survivors", r.values.at("survivors"), issues);

    return resolved;
}

ScenarioConfig resolve_scenario_or_throw(const KeyValues& key_values) {
    ResolvedScenario resolved = resolve_scenario(key_values);
    if (!resolved.issues.empty()) throw ConfigError(resolved.issues);
    return resolved.config;
}

std::map<std::string, std::string> scenario_to_keys(const ScenarioConfig& config) {
    std::map<std::string, std::string> keys;
    keys["uav.count"] = std::to_string(config.uav_count);
    keys["uav.speed_mps"] = format_double(config.cruise_speed_mps);
    keys["uav.detection_range_m"] = format_double(config.detection_range_m);
    keys["uav.battery_mah"] = format_double(config.battery_capacity_mah);
    keys["uav.battery_voltage_v"] = format_double(config.battery_voltage_v);
    keys["uav.power_base_w"] = format_double(config.power_base_w);
    keys["uav.power_flight_w_per_mps"] = format_double(config.power_flight_w_per_mps);
    keys["uav.power_llm_idle_w"] = format_double(config.power_llm_idle_w);
    keys["uav.power_llm_infer_w"] = format_double(config.power_llm_infer_w);
    keys["mission.command"] = config.mission_command;
    keys["mission.launch_x_m"] = format_double(config.launch_position.x);
    keys["mission.launch_y_m"] = format_double(config.launch_position.y);
    keys["mission.cell_size_m"] = format_double(config.cell_size_m);
    keys["mission.update_interval_s"] = format_double(config.update_interval_s);
    keys["mission.dwell_time_s"] = format_double(config.dwell_time_s);
    keys["mission.inference_latency_s"] = format_double(config.inference_latency_s);
    keys["mission.mode"] = config.mode == SimMode::Snapshot ? "snapshot" : "dynamic";
    keys["planner.kind"] = config.planner == PlannerChoice::Greedy    ? "greedy"
                           : config.planner == PlannerChoice::Cluster ? "cluster"
                                                                      : "remote";
    keys["planner.lambda"] = format_double(config.greedy.lambda);
    keys["planner.balance_b"] = format_double(config.greedy.balance_coefficient);
    keys["planner.max_retries"] = std::to_string(config.max_retries);
    keys["planner.url"] = config.remote.url;
    keys["planner.model"] = config.remote.model;
    keys["planner.timeout_s"] = format_double(config.remote.timeout_s);
    keys["planner.max_transport_retries"] = std::to_string(config.remote.max_transport_retries);
    keys["routing.kind"] = config.router == RouterChoice::NnTwoOpt ? "nn2opt" : "remote";
    keys["routing.two_opt_passes"] = std::to_string(config.two_opt_passes);
    keys["fire.mask"] = config.mask_path;
    keys["fire.synthetic.width_cells"] = std::to_string(config.synthetic.width_cells);
    keys["fire.synthetic.height_cells"] = std::to_string(config.synthetic.height_cells);
    keys["fire.synthetic.resolution_m"] = format_double(config.synthetic.resolution_m);
    keys["fire.synthetic.origin_x_m"] = format_double(config.synthetic.origin.x);
    keys["fire.synthetic.origin_y_m"] = format_double(config.synthetic.origin.y);
    if (config.synthetic.ignition_center) {
        keys["fire.synthetic.ignition_x_m"] = format_double(config.synthetic.ignition_center->x);
        keys["fire.synthetic.ignition_y_m"] = format_double(config.synthetic.ignition_center->y);
    }
    keys["fire.synthetic.radius_m"] = format_double(config.synthetic.radius_m);
    keys["fire.spread.probability"] = format_double(config.spread.ignition_probability);
    keys["fire.spread.neighborhood"] =
        config.spread.neighborhood == Neighborhood::FourConnected ? "4" : "8";
    keys["fire.spread.steps_per_update"] = std::to_string(config.spread.steps_per_update);
    keys["fire.updates"] = std::to_string(config.updates);
    keys["sim.seed"] = std::to_string(config.seed);
    keys["sim.dt_s"] = format_double(config.dt_s);
    keys["output.frame_interval_s"] = format_double(config.frame_interval_s);
    if (!config.survivors.empty()) {
        std::string list;
        for (const auto& s : config.survivors) {
            if (!list.empty()) list += "; ";
            list += format_double(s.x) + "," + format_double(s.y);
        }
        keys["survivors"] = list;
    }
    return keys;
}

} // namespace sar
