#include "swarmsar/sim_engine.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "swarmsar/errors.hpp"
#include "swarmsar/rng.hpp"

namespace sar {

const char* to_string(UavStatus status) {
    switch (status) {
        case UavStatus::EnRoute: return "enRoute";
        case UavStatus::Dwelling: return "dwelling";
        case UavStatus::Idle: return "idle";
        case UavStatus::Depleted: return "depleted";
    }
    return "unknown";
}

double power_draw(double speed_mps, bool inference_active, const ScenarioConfig& config) {
    if (speed_mps < 0.0)
        throw DomainError("power_draw: speed must be >= 0");
    return config.power_base_w + config.power_flight_w_per_mps * speed_mps +
           (inference_active ? config.power_llm_infer_w : config.power_llm_idle_w);
}

std::vector<int> detect_survivors(Vec2 position, std::span<const Vec2> survivors, double range_m) {
    if (range_m <= 0.0)
        throw DomainError("detect_survivors: range must be > 0");
    std::vector<int> detected;
    for (std::size_t i = 0; i < survivors.size(); ++i)
        if (distance(position, survivors[i]) <= range_m) detected.push_back(static_cast<int>(i));
    return detected;
}

double coverage_rate(const std::set<std::int64_t>& visited, const SurveySet& survey) {
    if (survey.points.empty())
        throw DomainError("coverage_rate: empty survey set");
    std::size_t covered = 0;
    for (const auto& p : survey.points)
        if (visited.count(p.id)) ++covered;
    return static_cast<double>(covered) / static_cast<double>(survey.points.size());
}

bool World::survey_complete() const {
    for (const auto& p : survey.points)
        if (!visited_union.count(p.id)) return false;
    return true;
}

bool World::all_depleted() const {
    for (const auto& uav : uavs)
        if (uav.status != UavStatus::Depleted) return false;
    return true;
}

bool World::stalled() const {
    for (const auto& uav : uavs) {
        if (uav.status == UavStatus::Depleted) continue;
        if (uav.inference_remaining_s > 1e-12 || uav.dwell_remaining_s > 1e-12 ||
            uav.route_cursor < uav.route.waypoints.size())
            return false;
    }
    return true;
}

namespace {

World world_from_mask(const ScenarioConfig& config, FireMask mask, int update_index) {
    if (config.uav_count < 1)
        throw DomainError("scenario: uav.count must be >= 1");
    World world;
    world.config = config;
    world.mask = std::move(mask);
    world.survey = generate_survey_points(world.mask, config.cell_size_m, update_index);
    world.positions = make_point_lookup(world.survey);
    world.update_index = update_index;
    world.uavs.resize(static_cast<std::size_t>(config.uav_count));
    for (int i = 0; i < config.uav_count; ++i) {
        UavState& uav = world.uavs[static_cast<std::size_t>(i)];
        uav.index = i;
        uav.position = config.launch_position;
        uav.remaining_energy_j = config.energy_capacity_j();
        uav.status = UavStatus::Idle;
    }
    return world;
}

std::unique_ptr<MissionPlanner> make_mission_planner(const ScenarioConfig& config) {
    switch (config.planner) {
        case PlannerChoice::Greedy: return std::make_unique<GreedyMissionPlanner>(config.greedy);
        case PlannerChoice::Cluster: return std::make_unique<ClusterMissionPlanner>();
        case PlannerChoice::Remote: return std::make_unique<RemoteMissionPlanner>(config.remote);
    }
    throw DomainError("unknown planner kind");
}

std::unique_ptr<RoutePlanner> make_route_planner(const ScenarioConfig& config) {
    switch (config.router) {
        case RouterChoice::NnTwoOpt:
            return std::make_unique<LocalRoutePlanner>(config.two_opt_passes);
        case RouterChoice::Remote: return std::make_unique<RemoteRoutePlanner>(config.remote);
    }
    throw DomainError("unknown routing kind");
}

std::string fmt1(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

std::string fmt2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

void mark_visited(World& world, UavState& uav, std::int64_t point_id, double instant,
                  std::vector<double>& visit_instants) {
    uav.visited.insert(point_id);
    if (world.visited_union.insert(point_id).second) visit_instants.push_back(instant);
}

void handle_arrival(World& world, UavState& uav, std::int64_t point_id, double instant,
                    std::vector<double>& visit_instants) {
    for (int s : detect_survivors(uav.position, world.config.survivors,
                                  world.config.detection_range_m)) {
        if (world.detected_survivors.insert(s).second)
            world.detections.push_back({s, uav.index, instant, world.update_index});
    }
    ++uav.route_cursor;
    if (world.config.dwell_time_s > 0.0) {
        uav.dwell_remaining_s = world.config.dwell_time_s;
        uav.dwelling_point_id = point_id;
        uav.status = UavStatus::Dwelling;
    } else {
        mark_visited(world, uav, point_id, instant, visit_instants);
    }
}

void advance_uav(World& world, UavState& uav, double dt, std::vector<double>& visit_instants) {
    if (uav.status == UavStatus::Depleted) return;

    double remaining = dt;
    const double t0 = world.time_s;
    auto now = [&] { return t0 + (dt - remaining); };

    while (remaining > 1e-12) {
        double power = 0.0;
        double phase = 0.0;
        bool flying = false;
        bool arrives = false;
        double speed = 0.0;
        Vec2 direction{};
        std::int64_t waypoint_id = -1;

        if (uav.inference_remaining_s > 1e-12) {
            uav.inference_active = true;
            phase = std::min(remaining, uav.inference_remaining_s);
            power = power_draw(0.0, true, world.config);
        } else if (uav.dwell_remaining_s > 1e-12) {
            uav.inference_active = false;
            uav.status = UavStatus::Dwelling;
            phase = std::min(remaining, uav.dwell_remaining_s);
            power = power_draw(0.0, false, world.config);
        } else if (uav.route_cursor < uav.route.waypoints.size()) {
            uav.inference_active = false;
            uav.status = UavStatus::EnRoute;
            waypoint_id = uav.route.waypoints[uav.route_cursor];
            auto it = world.positions.find(waypoint_id);
            if (it == world.positions.end())
                throw ConsistencyError("route waypoint " + std::to_string(waypoint_id) +
                                       " has no known position");
            Vec2 target = it->second;
            double leg = distance(uav.position, target);
            if (leg <= 1e-9) {
                uav.position = target;
                handle_arrival(world, uav, waypoint_id, now(), visit_instants);
                continue;
            }
            speed = world.config.cruise_speed_mps;
            direction = (target - uav.position) * (1.0 / leg);
            double time_to_arrive = leg / speed;
            arrives = time_to_arrive <= remaining + 1e-12;
            phase = arrives ? time_to_arrive : remaining;
            flying = true;
            power = power_draw(speed, false, world.config);
        } else {
            uav.inference_active = false;
            uav.status = UavStatus::Idle;
            phase = remaining;
            power = power_draw(0.0, false, world.config);
        }

        // Battery check: the phase runs only as long as energy lasts.
        double affordable = power > 0.0 ? uav.remaining_energy_j / power : phase;
        if (affordable < phase - 1e-12) {
            if (flying) {
                uav.position = uav.position + direction * (speed * affordable);
                uav.distance_flown_m += speed * affordable;
            }
            uav.energy_consumed_j += uav.remaining_energy_j;
            uav.remaining_energy_j = 0.0;
            remaining -= affordable;
            uav.status = UavStatus::Depleted;
            uav.inference_active = false;
            uav.depleted_at_s = now();
            return;
        }

        double energy = power * phase;
        uav.remaining_energy_j -= energy;
        uav.energy_consumed_j += energy;
        remaining -= phase;

        if (flying) {
            uav.distance_flown_m += speed * phase;
            if (arrives) {
                uav.position = world.positions.at(waypoint_id); // exact arrival, no drift
                handle_arrival(world, uav, waypoint_id, now(), visit_instants);
            } else {
                uav.position = uav.position + direction * (speed * phase);
            }
        } else if (uav.inference_remaining_s > 1e-12) {
            uav.inference_remaining_s -= phase;
            if (uav.inference_remaining_s <= 1e-12) {
                uav.inference_remaining_s = 0.0;
                uav.inference_active = false;
            }
        } else if (uav.dwell_remaining_s > 1e-12) {
            uav.dwell_remaining_s -= phase;
            if (uav.dwell_remaining_s <= 1e-12) {
                uav.dwell_remaining_s = 0.0;
                mark_visited(world, uav, uav.dwelling_point_id, now(), visit_instants);
                uav.dwelling_point_id = -1;
            }
        }

        if (uav.remaining_energy_j <= 1e-9) {
            uav.status = UavStatus::Depleted;
            uav.inference_active = false;
            uav.remaining_energy_j = 0.0;
            uav.depleted_at_s = now();
            return;
        }
    }

    if (uav.status != UavStatus::Depleted && uav.inference_remaining_s <= 1e-12 &&
        uav.dwell_remaining_s <= 1e-12 && uav.route_cursor >= uav.route.waypoints.size())
        uav.status = UavStatus::Idle;
}

} // namespace

World make_world(const ScenarioConfig& config) {
    return world_from_mask(config, config.initial_mask(), 0);
}

void dispatch_mission(World& world) {
    PlanningSummary summary;

    std::vector<SurveyPoint> unvisited;
    for (const auto& p : world.survey.points)
        if (!world.visited_union.count(p.id)) unvisited.push_back(p);

    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < world.uavs.size(); ++i) {
        UavState& uav = world.uavs[i];
        uav.route = Route{uav.index, uav.position, {}};
        uav.route_cursor = 0;
        uav.dwell_remaining_s = 0.0;
        uav.dwelling_point_id = -1;
        if (uav.status == UavStatus::Depleted) continue;
        uav.status = UavStatus::Idle;
        active.push_back(i);
    }
    world.plan_owners.clear();

    if (unvisited.empty() || active.empty()) {
        world.last_planning = summary;
        return;
    }

    SurveySet subset;
    subset.update_index = world.survey.update_index;
    subset.cell_size_m = world.survey.cell_size_m;
    subset.points = std::move(unvisited);

    const double capacity = world.config.energy_capacity_j();
    std::vector<UavDescriptor> descriptors;
    descriptors.reserve(active.size());
    for (std::size_t i : active) {
        const UavState& uav = world.uavs[i];
        descriptors.push_back({uav.index, uav.position, uav.remaining_energy_j / capacity});
    }

    auto planner = make_mission_planner(world.config);
    GreedyMissionPlanner fallback(world.config.greedy);
    summary.planner = planner->name();

    auto episode_context = [&](const char* what_failed, int uav_index) {
        std::string context = "planning episode at update index " +
                              std::to_string(world.update_index) + " (" + what_failed;
        if (uav_index >= 0) context += " for uav " + std::to_string(uav_index);
        return context + "): ";
    };

    MissionPrompt prompt =
        build_mission_prompt(world.config.mission_command, descriptors, subset);
    PlanningEpisode episode;
    try {
        episode = plan_with_validation(*planner, std::move(prompt), subset,
                                       world.config.max_retries, fallback);
    } catch (const ServiceError& e) {
        throw ServiceError(e.status, episode_context("mission planning", -1) + e.what());
    } catch (const TransportError& e) {
        throw TransportError(episode_context("mission planning", -1) + e.what());
    }
    summary.mission_attempts = episode.attempts;
    summary.mission_fallback = episode.fallback_used;
    summary.mission_parse_failures =
        static_cast<int>(std::count(episode.parse_failed.begin(), episode.parse_failed.end(),
                                    true));

    PointLookup subset_positions = make_point_lookup(subset);
    auto router = make_route_planner(world.config);
    LocalRoutePlanner route_fallback(world.config.two_opt_passes);

    for (std::size_t slot = 0; slot < active.size(); ++slot) {
        UavState& uav = world.uavs[active[slot]];
        const auto& ids = episode.final_assignment.per_uav[slot];
        for (std::int64_t id : ids) world.plan_owners[id] = uav.index;
        if (ids.empty()) continue;

        std::vector<SurveyPoint> points;
        points.reserve(ids.size());
        for (std::int64_t id : ids) points.push_back({id, subset_positions.at(id)});

        RoutePrompt route_prompt;
        route_prompt.assigned = points;
        route_prompt.uav_state_summary =
            "uav " + std::to_string(uav.index) + " at (" + fmt1(uav.position.x) + ", " +
            fmt1(uav.position.y) + ") m, remaining_energy=" +
            fmt2(uav.remaining_energy_j / capacity);

        RouteEpisode route_episode;
        try {
            route_episode =
                route_with_validation(*router, std::move(route_prompt), points, uav.position,
                                      uav.index, world.config.max_retries, route_fallback);
        } catch (const ServiceError& e) {
            throw ServiceError(e.status, episode_context("route planning", uav.index) + e.what());
        } catch (const TransportError& e) {
            throw TransportError(episode_context("route planning", uav.index) + e.what());
        }
        summary.route_attempts += route_episode.attempts;
        if (route_episode.fallback_used) ++summary.route_fallbacks;

        uav.route = route_episode.final_route;
        uav.route_cursor = 0;
        uav.status = UavStatus::EnRoute;
        if (world.config.inference_latency_s > 0.0)
            uav.inference_remaining_s = world.config.inference_latency_s;
    }
    world.last_planning = summary;
}

void step(World& world, double dt) {
    if (dt <= 0.0)
        throw DomainError("step: dt must be > 0");
    std::vector<double> visit_instants;
    for (auto& uav : world.uavs) advance_uav(world, uav, dt, visit_instants);
    world.time_s += dt;
    if (!world.completion_time_s && !visit_instants.empty() && world.survey_complete())
        world.completion_time_s =
            *std::max_element(visit_instants.begin(), visit_instants.end());
}

void on_boundary_update(World& world, const FireMask& new_mask) {
    new_mask.validate();
    world.mask = new_mask;
    ++world.update_index;
    world.survey =
        generate_survey_points(world.mask, world.config.cell_size_m, world.update_index);
    world.positions = make_point_lookup(world.survey);
    dispatch_mission(world);
    if (!world.survey_complete()) world.completion_time_s.reset();
}

namespace {

nlohmann::ordered_json frame_record(const World& world) {
    nlohmann::ordered_json record;
    record["type"] = "frame";
    record["t_s"] = world.time_s;
    record["update_index"] = world.update_index;
    nlohmann::ordered_json uavs = nlohmann::ordered_json::array();
    for (const auto& uav : world.uavs) {
        uavs.push_back({{"index", uav.index},
                        {"x_m", uav.position.x},
                        {"y_m", uav.position.y},
                        {"energy_j", uav.remaining_energy_j},
                        {"status", to_string(uav.status)}});
    }
    record["uavs"] = std::move(uavs);
    record["visited_count"] = world.visited_union.size();
    record["survey_total"] = world.survey.points.size();
    return record;
}

nlohmann::ordered_json plan_record(const World& world) {
    nlohmann::ordered_json record;
    record["type"] = "plan";
    record["t_s"] = world.time_s;
    record["update_index"] = world.update_index;
    record["egs"] = {{"x_m", world.config.launch_position.x},
                     {"y_m", world.config.launch_position.y}};
    record["cell_size_m"] = world.survey.cell_size_m;

    nlohmann::ordered_json points = nlohmann::ordered_json::array();
    for (const auto& p : world.survey.points) {
        auto owner = world.plan_owners.find(p.id);
        points.push_back({{"id", p.id},
                          {"x_m", p.position.x},
                          {"y_m", p.position.y},
                          {"uav", owner == world.plan_owners.end() ? -1 : owner->second},
                          {"visited", world.visited_union.count(p.id) > 0}});
    }
    record["points"] = std::move(points);

    nlohmann::ordered_json routes = nlohmann::ordered_json::array();
    for (const auto& uav : world.uavs) {
        if (uav.route.waypoints.empty()) continue;
        routes.push_back({{"uav", uav.index},
                          {"start_x_m", uav.route.start_position.x},
                          {"start_y_m", uav.route.start_position.y},
                          {"waypoints", uav.route.waypoints}});
    }
    record["routes"] = std::move(routes);

    record["boundary_cell_m"] = world.mask.resolution_m;
    nlohmann::ordered_json boundary = nlohmann::ordered_json::array();
    for (const auto& cell : extract_boundary(world.mask)) {
        boundary.push_back(
            {{"x_m", world.mask.origin.x + (cell.x + 0.5) * world.mask.resolution_m},
             {"y_m", world.mask.origin.y + (cell.y + 0.5) * world.mask.resolution_m}});
    }
    record["boundary"] = std::move(boundary);
    return record;
}

void emit(const FrameSink& sink, const nlohmann::ordered_json& record) {
    if (sink) sink(record.dump());
}

UpdateMetrics collect_update(const World& world) {
    UpdateMetrics metrics;
    metrics.update_index = world.update_index;
    metrics.survey_total = static_cast<int>(world.survey.points.size());
    // an empty survey set counts as covered; coverage_rate() itself rejects it
    metrics.coverage_rate =
        world.survey.points.empty() ? 1.0 : coverage_rate(world.visited_union, world.survey);
    metrics.completion_time_s = world.completion_time_s;
    metrics.planning = world.last_planning;
    for (const auto& uav : world.uavs) {
        metrics.per_uav.push_back({uav.index, static_cast<int>(uav.visited.size()),
                                   uav.distance_flown_m, uav.energy_consumed_j,
                                   uav.status == UavStatus::Depleted});
    }
    return metrics;
}

void merge_totals(MetricsReport& report, const UpdateMetrics& metrics) {
    report.planning_attempts_total +=
        metrics.planning.mission_attempts + metrics.planning.route_attempts;
    report.fallback_count +=
        (metrics.planning.mission_fallback ? 1 : 0) + metrics.planning.route_fallbacks;
}

constexpr double kTimeCap_s = 1e7;

/// Steps the world until coverage is complete, progress stalls, or the cap is
/// hit, emitting frames on the configured cadence.
void simulate_static(World& world, const FrameSink& frames) {
    const double dt = world.config.dt_s;
    const double interval = world.config.frame_interval_s;
    double last_emit = world.time_s;
    long next_tick = static_cast<long>(std::floor(world.time_s / interval)) + 1;

    while (!world.survey_complete() && !world.stalled() && world.time_s < kTimeCap_s) {
        step(world, dt);
        if (world.time_s + 1e-9 >= static_cast<double>(next_tick) * interval) {
            emit(frames, frame_record(world));
            last_emit = world.time_s;
            next_tick = static_cast<long>(std::floor(world.time_s / interval + 1e-9)) + 1;
        }
    }
    if (last_emit != world.time_s) emit(frames, frame_record(world));
}

} // namespace

MetricsReport run_scenario(const ScenarioConfig& config, const FrameSink& frames) {
    MetricsReport report;
    report.mode = config.mode == SimMode::Snapshot ? "snapshot" : "dynamic";

    std::vector<FireMask> masks;
    masks.reserve(static_cast<std::size_t>(config.updates));
    masks.push_back(config.initial_mask());
    std::uint64_t seed_state = config.seed;
    for (int u = 1; u < config.updates; ++u)
        masks.push_back(step_fire(masks.back(), config.spread, splitmix64(seed_state)));

    if (config.mode == SimMode::Snapshot) {
        report.mission_complete = true;
        for (int u = 0; u < config.updates; ++u) {
            World world = world_from_mask(config, masks[static_cast<std::size_t>(u)], u);
            dispatch_mission(world);
            if (world.survey_complete()) world.completion_time_s = 0.0;
            emit(frames, plan_record(world));
            emit(frames, frame_record(world));
            simulate_static(world, frames);

            UpdateMetrics metrics = collect_update(world);
            merge_totals(report, metrics);
            if (metrics.coverage_rate < 1.0) report.mission_complete = false;
            report.per_update.push_back(std::move(metrics));
            for (const auto& d : world.detections) report.detections.push_back(d);
        }
        return report;
    }

    // dynamic: one continuous mission with live boundary updates
    World world = world_from_mask(config, masks[0], 0);
    dispatch_mission(world);
    if (world.survey_complete()) world.completion_time_s = 0.0;
    emit(frames, plan_record(world));
    emit(frames, frame_record(world));

    const double dt = config.dt_s;
    const double interval = config.frame_interval_s;
    double last_emit = world.time_s;
    long next_tick = 1;
    int next_update = 1;
    double next_update_time = config.update_interval_s;

    while (true) {
        bool updates_pending = next_update < config.updates;
        if (updates_pending && world.time_s + 1e-9 >= next_update_time) {
            UpdateMetrics metrics = collect_update(world);
            merge_totals(report, metrics);
            report.per_update.push_back(std::move(metrics));

            on_boundary_update(world, masks[static_cast<std::size_t>(next_update)]);
            emit(frames, plan_record(world));
            ++next_update;
            next_update_time += config.update_interval_s;
            continue;
        }
        if (!updates_pending && world.survey_complete()) break;
        if (world.all_depleted()) break;
        if (!updates_pending && world.stalled()) break;
        if (world.time_s >= kTimeCap_s) break;

        step(world, dt);
        if (world.time_s + 1e-9 >= static_cast<double>(next_tick) * interval) {
            emit(frames, frame_record(world));
            last_emit = world.time_s;
            next_tick = static_cast<long>(std::floor(world.time_s / interval + 1e-9)) + 1;
        }
    }
    if (last_emit != world.time_s) emit(frames, frame_record(world));

    UpdateMetrics metrics = collect_update(world);
    merge_totals(report, metrics);
    report.mission_complete =
        next_update >= config.updates && metrics.coverage_rate >= 1.0;
    report.per_update.push_back(std::move(metrics));
    report.detections = world.detections;
    return report;
}

std::string metrics_to_jsonl(const MetricsReport& report) {
    std::string out;
    for (const auto& u : report.per_update) {
        nlohmann::ordered_json record;
        record["type"] = "update";
        record["update_index"] = u.update_index;
        record["survey_total"] = u.survey_total;
        record["coverage_rate"] = u.coverage_rate;
        if (u.completion_time_s)
            record["mission_completion_time_s"] = *u.completion_time_s;
        else
            record["mission_completion_time_s"] = nullptr;
        record["planning"] = {{"planner", u.planning.planner},
                              {"mission_attempts", u.planning.mission_attempts},
                              {"mission_fallback", u.planning.mission_fallback},
                              {"mission_parse_failures", u.planning.mission_parse_failures},
                              {"route_attempts", u.planning.route_attempts},
                              {"route_fallbacks", u.planning.route_fallbacks}};
        nlohmann::ordered_json uavs = nlohmann::ordered_json::array();
        for (const auto& m : u.per_uav) {
            uavs.push_back({{"index", m.index},
                            {"points_visited", m.points_visited},
                            {"distance_flown_m", m.distance_flown_m},
                            {"energy_consumed_j", m.energy_consumed_j},
                            {"depleted", m.depleted}});
        }
        record["uavs"] = std::move(uavs);
        out += record.dump();
        out += "\n";
    }

    nlohmann::ordered_json trailer;
    trailer["type"] = "summary";
    trailer["mode"] = report.mode;
    trailer["updates"] = report.per_update.size();
    trailer["mission_complete"] = report.mission_complete;
    trailer["planning_attempts_total"] = report.planning_attempts_total;
    trailer["fallback_count"] = report.fallback_count;
    nlohmann::ordered_json detections = nlohmann::ordered_json::array();
    for (const auto& d : report.detections) {
        detections.push_back({{"survivor", d.survivor_index},
                              {"uav", d.uav_index},
                              {"t_s", d.t_s},
                              {"update_index", d.update_index}});
    }
    trailer["detections"] = std::move(detections);
    out += trailer.dump();
    out += "\n";
    return out;
}

} // namespace sar
