#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "swarmsar/fire_world.hpp"
#include "swarmsar/geometry.hpp"
#include "swarmsar/planner.hpp"
#include "swarmsar/routing.hpp"
#include "swarmsar/scenario.hpp"

namespace sar {

enum class UavStatus { EnRoute, Dwelling, Idle, Depleted };

const char* to_string(UavStatus status);

struct UavState {
    int index{0};
    Vec2 position{};
    double remaining_energy_j{0.0};
    UavStatus status{UavStatus::Idle};
    Route route;
    std::size_t route_cursor{0};
    double dwell_remaining_s{0.0};
    std::int64_t dwelling_point_id{-1};
    double inference_remaining_s{0.0};
    bool inference_active{false};
    std::set<std::int64_t> visited;
    double distance_flown_m{0.0};
    double energy_consumed_j{0.0};
    std::optional<double> depleted_at_s;
};

struct Detection {
    int survivor_index{0};
    int uav_index{0};
    double t_s{0.0};
    int update_index{0};
};

struct PlanningSummary {
    std::string planner;
    int mission_attempts{0};
    bool mission_fallback{false};
    int mission_parse_failures{0};
    int route_attempts{0};
    int route_fallbacks{0};
};

struct UavMetrics {
    int index{0};
    int points_visited{0};
    double distance_flown_m{0.0};
    double energy_consumed_j{0.0};
    bool depleted{false};
};

struct UpdateMetrics {
    int update_index{0};
    int survey_total{0};
    double coverage_rate{0.0};
    std::optional<double> completion_time_s;
    std::vector<UavMetrics> per_uav;
    PlanningSummary planning;
};

struct MetricsReport {
    std::string mode;
    std::vector<UpdateMetrics> per_update;
    std::vector<Detection> detections;
    int fallback_count{0};
    int planning_attempts_total{0};
    bool mission_complete{false};
};

/// base + flight-per-m/s * speed + (inference or idle) planner power.
double power_draw(double speed_mps, bool inference_active, const ScenarioConfig& config);

/// Survivor indices within detection range (inclusive) of `position`.
std::vector<int> detect_survivors(Vec2 position, std::span<const Vec2> survivors, double range_m);

/// |visited ∩ S| / |S|. Throws DomainError on an empty survey set.
double coverage_rate(const std::set<std::int64_t>& visited, const SurveySet& survey);

/// Mutable mission state for the time-stepped simulation.
struct World {
    ScenarioConfig config;
    FireMask mask;
    SurveySet survey;
    PointLookup positions;
    std::vector<UavState> uavs;
    double time_s{0.0};
    int update_index{0};
    std::set<std::int64_t> visited_union;
    std::optional<double> completion_time_s;
    std::vector<Detection> detections;
    std::set<int> detected_survivors;
    PlanningSummary last_planning;
    std::map<std::int64_t, int> plan_owners; // point id -> assigned UAV, latest dispatch

    bool survey_complete() const;
    bool all_depleted() const;
    /// True when no UAV can make further progress (nothing en route, dwelling,
    /// or inferring).
    bool stalled() const;
};

/// Initial world: mask, survey set for update 0, fleet at the launch position
/// with full batteries and no routes.
World make_world(const ScenarioConfig& config);

/// Plans the unvisited survey points across the non-depleted fleet (primary
/// planner with greedy fallback), builds per-UAV routes (configured router
/// with nn+2-opt fallback), and starts the per-episode inference timers.
void dispatch_mission(World& world);

/// Advances every UAV by dt seconds with exact waypoint-arrival sub-stepping:
/// no overshoot, energy integrated per sub-phase, depletion at the exact
/// instant the battery empties, survivor detection at waypoint arrivals.
void step(World& world, double dt);

/// Applies a refreshed fire mask: regenerates the survey set (stable ids),
/// preserves visited status, and re-plans the unvisited points across the
/// still-active fleet.
void on_boundary_update(World& world, const FireMask& new_mask);

/// Receives one line-delimited record per emitted frame or plan.
using FrameSink = std::function<void(const std::string& line)>;

/// Runs the configured scenario to completion. Snapshot mode re-runs the
/// mission from launch for every boundary-update index; dynamic mode runs one
/// continuous mission with live updates every update_interval_s.
/// Deterministic given the config seed.
MetricsReport run_scenario(const ScenarioConfig& config, const FrameSink& frames = {});

/// Line-delimited metrics serialization: one record per update index plus a
/// trailing summary record.
std::string metrics_to_jsonl(const MetricsReport& report);

} // namespace sar
