#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "swarmsar/assignment.hpp"
#include "swarmsar/fire_world.hpp"
#include "swarmsar/geometry.hpp"
#include "swarmsar/remote_planner.hpp"

namespace sar {

enum class PlannerChoice { Greedy, Cluster, Remote };
enum class RouterChoice { NnTwoOpt, Remote };
enum class SimMode { Snapshot, Dynamic };

/// Synthetic ignition state used when no mask file is configured: a burning
/// disk centered in (or at a configured point of) the raster.
struct SyntheticFire {
    int width_cells{64};
    int height_cells{64};
    double resolution_m{150.0};
    Vec2 origin{};
    std::optional<Vec2> ignition_center; // default: raster center
    double radius_m{600.0};
};

/// Fully resolved scenario. Field defaults are the simulation constants of
/// the evaluated platform: 15 m/s cruise, 450 m survey cells, 1500 m
/// detection range, 9600 mAh battery, 45 W base power, 8 W per m/s flight
/// power, 5 W planner idle power, 10 W inference power.
struct ScenarioConfig {
    int uav_count{0}; // required, >= 1
    Vec2 launch_position{};
    double cruise_speed_mps{15.0};
    double detection_range_m{1500.0};
    double battery_capacity_mah{9600.0};
    double battery_voltage_v{14.8};
    double power_base_w{45.0};
    double power_flight_w_per_mps{8.0};
    double power_llm_idle_w{5.0};
    double power_llm_infer_w{10.0};

    std::string mission_command{
        "Survey every point in the fire region and report detected survivors."};
    double cell_size_m{450.0};
    double update_interval_s{300.0};
    double dwell_time_s{0.0};
    double inference_latency_s{0.0};
    SimMode mode{SimMode::Snapshot};

    PlannerChoice planner{PlannerChoice::Cluster};
    RouterChoice router{RouterChoice::NnTwoOpt};
    GreedyParams greedy{};
    int max_retries{3};
    int two_opt_passes{20};
    RemoteEndpointConfig remote{};

    std::string mask_path; // empty -> synthetic fire
    SyntheticFire synthetic{};
    FireSpreadParams spread{};
    int updates{1}; // number of boundary-update indices simulated

    std::uint64_t seed{0};
    double dt_s{1.0};
    double frame_interval_s{5.0};
    std::vector<Vec2> survivors;

    double energy_capacity_j() const { return battery_capacity_mah * battery_voltage_v * 3.6; }

    /// Loads the configured mask file, or synthesizes the ignition disk.
    FireMask initial_mask() const;
};

/// Ordered key/value pairs from a dotted-key config file. Lines are
/// `key = value`; '#' starts a comment; blank lines are skipped.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

KeyValues parse_key_values(const std::string& text);
KeyValues load_key_values(const std::filesystem::path& path);

/// Resolution result: a fully-defaulted config plus every problem found
/// (unknown key, type mismatch, range violation, missing required key).
/// The config is meaningful only when issues is empty.
struct ResolvedScenario {
    ScenarioConfig config;
    std::vector<std::string> issues;
};

ResolvedScenario resolve_scenario(const KeyValues& key_values);

/// resolve_scenario that throws ConfigError carrying all issues.
ScenarioConfig resolve_scenario_or_throw(const KeyValues& key_values);

/// Every config key with its materialized value, sorted by key; inverse of
/// resolve_scenario for round-tripping through manifests.
std::map<std::string, std::string> scenario_to_keys(const ScenarioConfig& config);

} // namespace sar
