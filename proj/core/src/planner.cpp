#include "swarmsar/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <set>

#include <json.hpp>

#include "swarmsar/errors.hpp"
#include "swarmsar/rng.hpp"

namespace sar {

namespace {

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

void append_point_lines(std::string& out, std::span<const SurveyPoint> points) {
    for (const auto& p : points) {
        out += "point " + std::to_string(p.id) + ": (" + fmt1(p.position.x) + ", " +
               fmt1(p.position.y) + ")\n";
    }
}

void append_corrections(std::string& out, const std::vector<std::string>& corrections) {
    if (corrections.empty()) return;
    out += "\n\nCorrections:";
    for (const auto& c : corrections) out += "\n" + c;
}

/// Span of the first balanced open..close group starting at or after `from`,
/// skipping over string literals.
std::optional<std::pair<std::size_t, std::size_t>> find_balanced(const std::string& s,
                                                                 std::size_t from, char open,
                                                                 char close) {
    std::size_t start = s.find(open, from);
    while (start != std::string::npos) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < s.size(); ++i) {
            char c = s[i];
            if (in_string) {
                if (escaped)
                    escaped = false;
                else if (c == '\\')
                    escaped = true;
                else if (c == '"')
                    in_string = false;
                continue;
            }
            if (c == '"')
                in_string = true;
            else if (c == open)
                ++depth;
            else if (c == close) {
                --depth;
                if (depth == 0) return std::make_pair(start, i);
            }
        }
        start = s.find(open, start + 1);
    }
    return std::nullopt;
}

std::optional<int> uav_key_index(const std::string& key) {
    constexpr const char* prefix = "uav_";
    if (key.rfind(prefix, 0) != 0 || key.size() == 4) return std::nullopt;
    int index = 0;
    for (std::size_t i = 4; i < key.size(); ++i) {
        if (key[i] < '0' || key[i] > '9') return std::nullopt;
        index = index * 10 + (key[i] - '0');
    }
    return index;
}

std::optional<std::vector<std::int64_t>> as_id_array(const nlohmann::json& value) {
    if (!value.is_array()) return std::nullopt;
    std::vector<std::int64_t> ids;
    ids.reserve(value.size());
    for (const auto& el : value) {
        if (!el.is_number_integer()) return std::nullopt;
        ids.push_back(el.get<std::int64_t>());
    }
    return ids;
}

} // namespace

std::string MissionPrompt::text() const {
    std::string out = "Mission: " + mission_command + "\n";
    out +=
        "Objectives: maximize coverage efficiency; minimize each UAV's travel distance; "
        "balance workload evenly across UAVs; assign every survey point to exactly one UAV "
        "with no overlap.\n";
    out += "UAVs (" + std::to_string(uavs.size()) + "):\n";
    for (const auto& u : uavs) {
        out += "uav " + std::to_string(u.index) + ": position=(" + fmt1(u.position.x) + ", " +
               fmt1(u.position.y) + ") m, remaining_energy=" + fmt2(u.energy_fraction) + "\n";
    }
    out += "Survey points (" + std::to_string(survey_points.size()) + "):\n";
    append_point_lines(out, survey_points);
    out +=
        "Respond with a single JSON object mapping \"uav_<index>\" to an array of assigned "
        "survey point ids.";
    append_corrections(out, correction_history);
    return out;
}

MissionPrompt build_mission_prompt(std::string command, std::vector<UavDescriptor> uavs,
                                   const SurveySet& survey) {
    if (survey.points.empty())
        throw DomainError("build_mission_prompt: empty survey set");
    MissionPrompt prompt;
    prompt.mission_command = std::move(command);
    prompt.uavs = std::move(uavs);
    prompt.survey_points = survey.points;
    return prompt;
}

std::string RoutePrompt::text() const {
    std::string out = "Plan a flight route for one UAV.\n";
    out += "UAV state: " + uav_state_summary + "\n";
    out += "Assigned survey points (" + std::to_string(assigned.size()) + "):\n";
    append_point_lines(out, assigned);
    out +=
        "Visit every assigned point exactly once, minimizing total flight distance from the "
        "current position.\n";
    out += "Respond with a single JSON array of the assigned survey point ids in visit order.";
    append_corrections(out, correction_history);
    return out;
}

std::string build_route_prompt(std::span<const SurveyPoint> assigned,
                               const std::string& uav_state_summary) {
    RoutePrompt prompt;
    prompt.assigned.assign(assigned.begin(), assigned.end());
    prompt.uav_state_summary = uav_state_summary;
    return prompt.text();
}

Assignment parse_assignment(const std::string& text, const SurveySet& survey, int uav_count) {
    (void)survey; // ids are passed through untouched; validation flags unknowns
    std::size_t from = 0;
    while (true) {
        auto span = find_balanced(text, from, '{', '}');
        if (!span) break;
        from = span->first + 1;

        nlohmann::json candidate;
        try {
            candidate =
                nlohmann::json::parse(text.substr(span->first, span->second - span->first + 1));
        } catch (const nlohmann::json::exception&) {
            continue;
        }
        if (!candidate.is_object()) continue;

        Assignment assignment;
        assignment.per_uav.assign(static_cast<std::size_t>(uav_count), {});
        bool any_uav_key = false;
        bool well_formed = true;
        for (auto it = candidate.begin(); it != candidate.end(); ++it) {
            auto index = uav_key_index(it.key());
            if (!index) continue; // tolerate commentary keys around the mapping
            auto ids = as_id_array(it.value());
            if (!ids || *index < 0 || *index >= uav_count) {
                well_formed = false;
                break;
            }
            any_uav_key = true;
            assignment.per_uav[static_cast<std::size_t>(*index)] = std::move(*ids);
        }
        if (well_formed && any_uav_key) return assignment;
    }
    throw ParseError("no well-formed uav_<k> assignment mapping found in planner output");
}

Route parse_route(const std::string& text, std::span<const SurveyPoint> assigned) {
    (void)assigned;
    std::size_t from = 0;
    while (true) {
        auto span = find_balanced(text, from, '[', ']');
        if (!span) break;
        from = span->first + 1;

        nlohmann::json candidate;
        try {
            candidate =
                nlohmann::json::parse(text.substr(span->first, span->second - span->first + 1));
        } catch (const nlohmann::json::exception&) {
            continue;
        }
        auto ids = as_id_array(candidate);
        if (!ids) continue;

        Route route;
        route.waypoints = std::move(*ids);
        return route;
    }
    throw ParseError("no well-formed waypoint id array found in planner output");
}

PlannerProposal GreedyMissionPlanner::propose(const MissionPrompt& prompt, const SurveySet& survey,
                                              int uav_count) {
    if (static_cast<int>(prompt.uavs.size()) != uav_count)
        throw DomainError("greedy planner: prompt UAV descriptors do not match uav_count");
    std::vector<Vec2> positions;
    positions.reserve(prompt.uavs.size());
    for (const auto& u : prompt.uavs) positions.push_back(u.position);
    PlannerProposal proposal;
    proposal.assignment = greedy_assign(positions, survey, params_);
    return proposal;
}

Assignment cluster_plan(std::span<const Vec2> uav_positions, const SurveySet& survey) {
    const int n_uavs = static_cast<int>(uav_positions.size());
    if (n_uavs < 1)
        throw DomainError("cluster_plan: need at least one UAV");

    Assignment assignment;
    assignment.per_uav.assign(static_cast<std::size_t>(n_uavs), {});
    const std::size_t n_points = survey.points.size();
    if (n_points == 0) return assignment;

    Vec2 centroid{};
    for (const auto& p : survey.points) centroid = centroid + p.position;
    centroid = centroid * (1.0 / static_cast<double>(n_points));

    std::vector<const SurveyPoint*> ordered;
    ordered.reserve(n_points);
    for (const auto& p : survey.points) ordered.push_back(&p);
    std::sort(ordered.begin(), ordered.end(), [&](const SurveyPoint* a, const SurveyPoint* b) {
        double aa = std::atan2(a->position.y - centroid.y, a->position.x - centroid.x);
        double ab = std::atan2(b->position.y - centroid.y, b->position.x - centroid.x);
        if (aa != ab) return aa < ab;
        return a->id < b->id;
    });

    // Contiguous arcs whose sizes differ by at most one.
    const std::size_t base = n_points / static_cast<std::size_t>(n_uavs);
    const std::size_t remainder = n_points % static_cast<std::size_t>(n_uavs);
    std::vector<std::vector<const SurveyPoint*>> arcs(static_cast<std::size_t>(n_uavs));
    std::size_t cursor = 0;
    for (std::size_t a = 0; a < arcs.size(); ++a) {
        std::size_t size = base + (a < remainder ? 1 : 0);
        for (std::size_t k = 0; k < size; ++k) arcs[a].push_back(ordered[cursor++]);
    }

    std::vector<Vec2> arc_centroids(arcs.size(), centroid);
    for (std::size_t a = 0; a < arcs.size(); ++a) {
        if (arcs[a].empty()) continue;
        Vec2 c{};
        for (const auto* p : arcs[a]) c = c + p->position;
        arc_centroids[a] = c * (1.0 / static_cast<double>(arcs[a].size()));
    }

    std::vector<bool> uav_matched(static_cast<std::size_t>(n_uavs), false);
    std::vector<bool> arc_matched(arcs.size(), false);
    for (int round = 0; round < n_uavs; ++round) {
        double best = std::numeric_limits<double>::infinity();
        int best_uav = -1;
        std::size_t best_arc = 0;
        for (int u = 0; u < n_uavs; ++u) {
            if (uav_matched[static_cast<std::size_t>(u)]) continue;
            for (std::size_t a = 0; a < arcs.size(); ++a) {
                if (arc_matched[a]) continue;
                double d = distance(uav_positions[static_cast<std::size_t>(u)], arc_centroids[a]);
                if (d < best) {
                    best = d;
                    best_uav = u;
                    best_arc = a;
                }
            }
        }
        uav_matched[static_cast<std::size_t>(best_uav)] = true;
        arc_matched[best_arc] = true;
        for (const auto* p : arcs[best_arc])
            assignment.per_uav[static_cast<std::size_t>(best_uav)].push_back(p->id);
    }
    return assignment;
}

PlannerProposal ClusterMissionPlanner::propose(const MissionPrompt& prompt,
                                               const SurveySet& survey, int uav_count) {
    if (static_cast<int>(prompt.uavs.size()) != uav_count)
        throw DomainError("cluster planner: prompt UAV descriptors do not match uav_count");
    std::vector<Vec2> positions;
    positions.reserve(prompt.uavs.size());
    for (const auto& u : prompt.uavs) positions.push_back(u.position);
    PlannerProposal proposal;
    proposal.assignment = cluster_plan(positions, survey);
    return proposal;
}

PlannerProposal RemoteMissionPlanner::propose(const MissionPrompt& prompt, const SurveySet&,
                                              int) {
    PlannerProposal proposal;
    proposal.text = chat_completion(
        "You are the mission planner of an edge ground station coordinating a UAV swarm.",
        prompt.text(), config_);
    return proposal;
}

FaultInjectedMissionPlanner::FaultInjectedMissionPlanner(std::unique_ptr<MissionPlanner> inner,
                                                         FaultSpec spec)
    : inner_(std::move(inner)), spec_(spec), rng_state_(spec.seed) {
    if (dynamic_cast<FaultInjectedMissionPlanner*>(inner_.get()))
        throw ContractError("fault injection cannot wrap another fault-injected planner");
}

std::string FaultInjectedMissionPlanner::name() const {
    return "fault(" + inner_->name() + ")";
}

bool FaultInjectedMissionPlanner::roll() {
    if (spec_.max_faults >= 0 && faults_done_ >= spec_.max_faults) return false;
    if (spec_.probability >= 1.0) return true;
    double u = static_cast<double>(splitmix64(rng_state_) >> 11) * 0x1.0p-53;
    return u < spec_.probability;
}

PlannerProposal FaultInjectedMissionPlanner::propose(const MissionPrompt& prompt,
                                                     const SurveySet& survey, int uav_count) {
    PlannerProposal proposal = inner_->propose(prompt, survey, uav_count);
    if (!roll()) return proposal;
    ++faults_done_;

    if (spec_.kind == FaultKind::GarbageText) {
        proposal.assignment.reset();
        proposal.text = "I cannot help with that.";
        return proposal;
    }
    if (!proposal.assignment) return proposal;

    Assignment& asg = *proposal.assignment;
    std::vector<std::pair<std::size_t, std::size_t>> slots;
    for (std::size_t u = 0; u < asg.per_uav.size(); ++u)
        for (std::size_t s = 0; s < asg.per_uav[u].size(); ++s) slots.emplace_back(u, s);

    switch (spec_.kind) {
        case FaultKind::DuplicateId: {
            if (slots.empty()) break;
            auto [u, s] = slots[splitmix64(rng_state_) % slots.size()];
            std::size_t target = splitmix64(rng_state_) % asg.per_uav.size();
            asg.per_uav[target].push_back(asg.per_uav[u][s]);
            break;
        }
        case FaultKind::DropId: {
            if (slots.empty()) break;
            auto [u, s] = slots[splitmix64(rng_state_) % slots.size()];
            asg.per_uav[u].erase(asg.per_uav[u].begin() + static_cast<std::ptrdiff_t>(s));
            break;
        }
        case FaultKind::InventId: {
            std::int64_t max_id = 0;
            for (const auto& p : survey.points) max_id = std::max(max_id, p.id);
            std::size_t target = splitmix64(rng_state_) % asg.per_uav.size();
            asg.per_uav[target].push_back(max_id + 1 +
                                          static_cast<std::int64_t>(splitmix64(rng_state_) % 7));
            break;
        }
        case FaultKind::GarbageText:
            break;
    }
    return proposal;
}

PlanningEpisode plan_with_validation(MissionPlanner& planner, MissionPrompt prompt,
                                     const SurveySet& survey, int max_retries,
                                     MissionPlanner& fallback) {
    if (max_retries < 0)
        throw DomainError("plan_with_validation: max_retries must be >= 0");

    const int uav_count = static_cast<int>(prompt.uavs.size());
    PlanningEpisode episode;
    episode.planner_name = planner.name();

    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        PlannerProposal proposal = planner.propose(prompt, survey, uav_count);

        std::optional<Assignment> assignment = proposal.assignment;
        bool parse_ok = true;
        if (!assignment) {
            try {
                assignment = parse_assignment(proposal.text, survey, uav_count);
            } catch (const ParseError&) {
                parse_ok = false;
            }
        }

        ValidationVerdict verdict;
        if (parse_ok) {
            verdict = validate_assignment(*assignment, survey);
        } else {
            verdict.kind = VerdictKind::ExtraOrInvented; // unparseable output is treated
            verdict.expected_total = survey.points.size(); // as hallucinated content
        }
        ++episode.attempts;
        episode.verdicts.push_back(verdict);
        episode.parse_failed.push_back(!parse_ok);

        if (verdict.valid()) {
            episode.final_assignment = std::move(*assignment);
            episode.final_prompt = std::move(prompt);
            return episode;
        }
        if (attempt < max_retries) {
            prompt.correction_history.push_back(
                parse_ok ? correction_message(verdict, CorrectionContext::Mission)
                         : corrections::mission_extra);
        }
    }

    episode.fallback_used = true;
    PlannerProposal terminal = fallback.propose(prompt, survey, uav_count);
    std::optional<Assignment> assignment = terminal.assignment;
    if (!assignment) {
        try {
            assignment = parse_assignment(terminal.text, survey, uav_count);
        } catch (const ParseError&) {
            throw Error("fatal planning error: fallback planner output was unparseable");
        }
    }
    if (!validate_assignment(*assignment, survey).valid())
        throw Error("fatal planning error: fallback planner produced an invalid assignment");
    episode.final_assignment = std::move(*assignment);
    episode.final_prompt = std::move(prompt);
    return episode;
}

RouteProposal LocalRoutePlanner::propose(const RoutePrompt&, std::span<const SurveyPoint> assigned,
                                         Vec2 start, int uav_index) {
    RouteProposal proposal;
    Route route = nn_route(start, assigned, uav_index);
    proposal.route = two_opt(route, make_point_lookup(assigned), two_opt_passes_);
    return proposal;
}

RouteProposal RemoteRoutePlanner::propose(const RoutePrompt& prompt, std::span<const SurveyPoint>,
                                          Vec2, int) {
    RouteProposal proposal;
    proposal.text = chat_completion(
        "You are the onboard route planner of a search-and-rescue UAV.", prompt.text(), config_);
    return proposal;
}

FaultInjectedRoutePlanner::FaultInjectedRoutePlanner(std::unique_ptr<RoutePlanner> inner,
                                                     FaultSpec spec)
    : inner_(std::move(inner)), spec_(spec), rng_state_(spec.seed) {
    if (dynamic_cast<FaultInjectedRoutePlanner*>(inner_.get()))
        throw ContractError("fault injection cannot wrap another fault-injected planner");
}

std::string FaultInjectedRoutePlanner::name() const {
    return "fault(" + inner_->name() + ")";
}

bool FaultInjectedRoutePlanner::roll() {
    if (spec_.max_faults >= 0 && faults_done_ >= spec_.max_faults) return false;
    if (spec_.probability >= 1.0) return true;
    double u = static_cast<double>(splitmix64(rng_state_) >> 11) * 0x1.0p-53;
    return u < spec_.probability;
}

RouteProposal FaultInjectedRoutePlanner::propose(const RoutePrompt& prompt,
                                                 std::span<const SurveyPoint> assigned, Vec2 start,
                                                 int uav_index) {
    RouteProposal proposal = inner_->propose(prompt, assigned, start, uav_index);
    if (!roll()) return proposal;
    ++faults_done_;

    if (spec_.kind == FaultKind::GarbageText) {
        proposal.route.reset();
        proposal.text = "I cannot help with that.";
        return proposal;
    }
    if (!proposal.route || proposal.route->waypoints.empty()) return proposal;

    auto& waypoints = proposal.route->waypoints;
    switch (spec_.kind) {
        case FaultKind::DuplicateId:
            waypoints.push_back(waypoints[splitmix64(rng_state_) % waypoints.size()]);
            break;
        case FaultKind::DropId:
            waypoints.erase(waypoints.begin() +
                            static_cast<std::ptrdiff_t>(splitmix64(rng_state_) % waypoints.size()));
            break;
        case FaultKind::InventId: {
            std::int64_t max_id = 0;
            for (const auto& p : assigned) max_id = std::max(max_id, p.id);
            waypoints.push_back(max_id + 1 +
                                static_cast<std::int64_t>(splitmix64(rng_state_) % 7));
            break;
        }
        case FaultKind::GarbageText:
            break;
    }
    return proposal;
}

RouteEpisode route_with_validation(RoutePlanner& planner, RoutePrompt prompt,
                                   std::span<const SurveyPoint> assigned, Vec2 start,
                                   int uav_index, int max_retries, RoutePlanner& fallback) {
    if (max_retries < 0)
        throw DomainError("route_with_validation: max_retries must be >= 0");

    std::set<std::int64_t> assigned_ids;
    for (const auto& p : assigned) assigned_ids.insert(p.id);

    RouteEpisode episode;
    episode.planner_name = planner.name();

    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        RouteProposal proposal = planner.propose(prompt, assigned, start, uav_index);

        std::optional<Route> route = proposal.route;
        bool parse_ok = true;
        if (!route) {
            try {
                route = parse_route(proposal.text, assigned);
            } catch (const ParseError&) {
                parse_ok = false;
            }
        }
        if (route) {
            route->uav_index = uav_index;
            route->start_position = start;
        }

        ValidationVerdict verdict;
        if (parse_ok) {
            verdict = validate_route(*route, assigned_ids);
        } else {
            verdict.kind = VerdictKind::ExtraOrInvented;
            verdict.expected_total = assigned_ids.size();
        }
        ++episode.attempts;
        episode.verdicts.push_back(verdict);
        episode.parse_failed.push_back(!parse_ok);

        if (verdict.valid()) {
            episode.final_route = std::move(*route);
            episode.final_prompt = std::move(prompt);
            return episode;
        }
        if (attempt < max_retries) {
            prompt.correction_history.push_back(
                parse_ok ? correction_message(verdict, CorrectionContext::Route)
                         : corrections::route_extra);
        }
    }

    episode.fallback_used = true;
    RouteProposal terminal = fallback.propose(prompt, assigned, start, uav_index);
    std::optional<Route> route = terminal.route;
    if (!route) {
        try {
            route = parse_route(terminal.text, assigned);
        } catch (const ParseError&) {
            throw Error("fatal planning error: fallback route planner output was unparseable");
        }
    }
    route->uav_index = uav_index;
    route->start_position = start;
    if (!validate_route(*route, assigned_ids).valid())
        throw Error("fatal planning error: fallback route planner produced an invalid route");
    episode.final_route = std::move(*route);
    episode.final_prompt = std::move(prompt);
    return episode;
}

std::string assignment_to_wire(const Assignment& assignment) {
    nlohmann::ordered_json wire = nlohmann::ordered_json::object();
    for (std::size_t u = 0; u < assignment.per_uav.size(); ++u)
        wire["uav_" + std::to_string(u)] = assignment.per_uav[u];
    return wire.dump();
}

} // namespace sar
