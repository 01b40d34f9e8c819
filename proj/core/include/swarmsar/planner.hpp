#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarmsar/assignment.hpp"
#include "swarmsar/fire_world.hpp"
#include "swarmsar/geometry.hpp"
#include "swarmsar/remote_planner.hpp"
#include "swarmsar/routing.hpp"

namespace sar {

/// Telemetry snapshot of one UAV as presented to the mission planner.
struct UavDescriptor {
    int index{0};
    Vec2 position{};
    double energy_fraction{1.0};
};

/// Structured mission-planner input: command, fleet state, survey set, and the
/// correction texts appended after failed validations (in append order).
struct MissionPrompt {
    std::string mission_command;
    std::vector<UavDescriptor> uavs;
    std::vector<SurveyPoint> survey_points;
    std::vector<std::string> correction_history;

    /// Renders the full prompt in fixed template order: command, objectives,
    /// one line per UAV, one line per survey point, response-format
    /// instruction, then corrections. With corrections present the text ends
    /// exactly with the last correction string.
    std::string text() const;
};

MissionPrompt build_mission_prompt(std::string command, std::vector<UavDescriptor> uavs,
                                   const SurveySet& survey);

/// Per-UAV route-planner input (the onboard half of the workflow).
struct RoutePrompt {
    std::vector<SurveyPoint> assigned;
    std::string uav_state_summary;
    std::vector<std::string> correction_history;

    std::string text() const;
};

/// Renders the onboard route prompt for an assigned point list.
std::string build_route_prompt(std::span<const SurveyPoint> assigned,
                               const std::string& uav_state_summary);

/// Extracts the first well-formed (optionally fenced) JSON object mapping
/// "uav_<k>" keys to integer-id arrays. Unknown ids are preserved so that
/// validation can flag them. Throws ParseError when no such block exists.
Assignment parse_assignment(const std::string& text, const SurveySet& survey, int uav_count);

/// Extracts the first JSON array of integer ids as a route waypoint list.
/// Throws ParseError when no such array exists.
Route parse_route(const std::string& text, std::span<const SurveyPoint> assigned);

/// What a planner returned: a structured assignment (deterministic planners)
/// or raw model text that still has to be parsed.
struct PlannerProposal {
    std::optional<Assignment> assignment;
    std::string text;
};

class MissionPlanner {
public:
    virtual ~MissionPlanner() = default;
    virtual std::string name() const = 0;
    virtual PlannerProposal propose(const MissionPrompt& prompt, const SurveySet& survey,
                                    int uav_count) = 0;
};

/// Distance-plus-workload-penalty baseline; always yields a valid partition.
class GreedyMissionPlanner : public MissionPlanner {
public:
    explicit GreedyMissionPlanner(GreedyParams params = {}) : params_(params) {}
    std::string name() const override { return "greedy"; }
    PlannerProposal propose(const MissionPrompt& prompt, const SurveySet& survey,
                            int uav_count) override;

private:
    GreedyParams params_;
};

/// Sorts survey points by angle around their centroid, splits them into
/// contiguous arcs whose sizes differ by at most one, and matches arcs to
/// UAVs by greedy nearest-arc-centroid with index tie-break. Valid by
/// construction.
Assignment cluster_plan(std::span<const Vec2> uav_positions, const SurveySet& survey);

/// Deterministic stand-in for the full-scale edge planner's clustered output.
class ClusterMissionPlanner : public MissionPlanner {
public:
    std::string name() const override { return "cluster"; }
    PlannerProposal propose(const MissionPrompt& prompt, const SurveySet& survey,
                            int uav_count) override;
};

/// Sends the rendered prompt to a chat-completion endpoint and returns the
/// raw message text for parsing.
class RemoteMissionPlanner : public MissionPlanner {
public:
    explicit RemoteMissionPlanner(RemoteEndpointConfig config) : config_(std::move(config)) {}
    std::string name() const override { return "remote"; }
    PlannerProposal propose(const MissionPrompt& prompt, const SurveySet& survey,
                            int uav_count) override;

private:
    RemoteEndpointConfig config_;
};

enum class FaultKind { DuplicateId, DropId, InventId, GarbageText };

/// Fault-injection control. `probability` is evaluated per proposal with the
/// seeded generator; `max_faults` < 0 means unlimited.
struct FaultSpec {
    FaultKind kind{FaultKind::DuplicateId};
    double probability{1.0};
    std::uint64_t seed{0};
    int max_faults{-1};
};

/// Wraps another planner and corrupts its proposals; exists to exercise the
/// validation loop. Never wrap another fault-injected planner.
class FaultInjectedMissionPlanner : public MissionPlanner {
public:
    FaultInjectedMissionPlanner(std::unique_ptr<MissionPlanner> inner, FaultSpec spec);
    std::string name() const override;
    PlannerProposal propose(const MissionPrompt& prompt, const SurveySet& survey,
                            int uav_count) override;

private:
    std::unique_ptr<MissionPlanner> inner_;
    FaultSpec spec_;
    std::uint64_t rng_state_;
    int faults_done_{0};

    bool roll();
};

/// Audit record of one plan-validate-correct loop.
struct PlanningEpisode {
    int attempts{0};
    Assignment final_assignment;
    std::vector<ValidationVerdict> verdicts; // one per attempt, in order
    std::vector<bool> parse_failed;          // parallel to verdicts
    bool fallback_used{false};
    MissionPrompt final_prompt;
    std::string planner_name;
};

/// The bounded plan-validate-correct-replan loop of the edge station: invoke
/// the planner, parse raw text when needed, validate; on failure append the
/// matching correction message and retry. After max_retries failed re-plans
/// the fallback planner produces the terminal assignment (which must be
/// valid). Parse failures count as failed attempts and append the
/// hallucination correction.
PlanningEpisode plan_with_validation(MissionPlanner& planner, MissionPrompt prompt,
                                     const SurveySet& survey, int max_retries,
                                     MissionPlanner& fallback);

struct RouteProposal {
    std::optional<Route> route;
    std::string text;
};

class RoutePlanner {
public:
    virtual ~RoutePlanner() = default;
    virtual std::string name() const = 0;
    virtual RouteProposal propose(const RoutePrompt& prompt,
                                  std::span<const SurveyPoint> assigned, Vec2 start,
                                  int uav_index) = 0;
};

/// Deterministic onboard stand-in: nearest-neighbor chain refined by 2-opt.
class LocalRoutePlanner : public RoutePlanner {
public:
    explicit LocalRoutePlanner(int two_opt_passes = 20) : two_opt_passes_(two_opt_passes) {}
    std::string name() const override { return "nn2opt"; }
    RouteProposal propose(const RoutePrompt& prompt, std::span<const SurveyPoint> assigned,
                          Vec2 start, int uav_index) override;

private:
    int two_opt_passes_;
};

class RemoteRoutePlanner : public RoutePlanner {
public:
    explicit RemoteRoutePlanner(RemoteEndpointConfig config) : config_(std::move(config)) {}
    std::string name() const override { return "remote"; }
    RouteProposal propose(const RoutePrompt& prompt, std::span<const SurveyPoint> assigned,
                          Vec2 start, int uav_index) override;

private:
    RemoteEndpointConfig config_;
};

class FaultInjectedRoutePlanner : public RoutePlanner {
public:
    FaultInjectedRoutePlanner(std::unique_ptr<RoutePlanner> inner, FaultSpec spec);
    std::string name() const override;
    RouteProposal propose(const RoutePrompt& prompt, std::span<const SurveyPoint> assigned,
                          Vec2 start, int uav_index) override;

private:
    std::unique_ptr<RoutePlanner> inner_;
    FaultSpec spec_;
    std::uint64_t rng_state_;
    int faults_done_{0};

    bool roll();
};

struct RouteEpisode {
    int attempts{0};
    Route final_route;
    std::vector<ValidationVerdict> verdicts;
    std::vector<bool> parse_failed;
    bool fallback_used{false};
    RoutePrompt final_prompt;
    std::string planner_name;
};

/// Onboard analogue of plan_with_validation, driving route planning with the
/// route-context correction strings; the fallback route planner must produce
/// a valid route.
RouteEpisode route_with_validation(RoutePlanner& planner, RoutePrompt prompt,
                                   std::span<const SurveyPoint> assigned, Vec2 start,
                                   int uav_index, int max_retries, RoutePlanner& fallback);

/// The assignment wire format used for planner exchange and logs:
/// {"uav_0": [ids...], "uav_1": [...], ...}.
std::string assignment_to_wire(const Assignment& assignment);

} // namespace sar
