#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <unordered_map>
#include <vector>

#include "swarmsar/assignment.hpp"
#include "swarmsar/fire_world.hpp"
#include "swarmsar/geometry.hpp"

namespace sar {

/// Open flight path for one UAV: start position, then the waypoint ids in
/// visit order. There is no return leg.
struct Route {
    int uav_index{0};
    Vec2 start_position{};
    std::vector<std::int64_t> waypoints;
};

using PointLookup = std::unordered_map<std::int64_t, Vec2>;

PointLookup make_point_lookup(std::span<const SurveyPoint> points);
PointLookup make_point_lookup(const SurveySet& survey);

/// Greedy nearest-neighbor chain over the assigned points, starting at
/// `start`; distance ties break to the lower point id. An empty assignment
/// yields an empty (zero-length) route.
Route nn_route(Vec2 start, std::span<const SurveyPoint> assigned, int uav_index = 0);

/// 2-opt local search on the open path: reverses waypoint segments while an
/// improving swap exists, up to max_passes full passes. The waypoint set is
/// unchanged and the length never increases.
Route two_opt(const Route& route, const PointLookup& positions, int max_passes = 20);

/// Sum of Euclidean leg lengths from the start position through all waypoints.
/// Throws ConsistencyError if a waypoint id has no known position.
double route_length(const Route& route, const PointLookup& positions);

/// Set-equality verdict between the route's waypoints and the assigned ids;
/// same semantics as validate_assignment.
ValidationVerdict validate_route(const Route& route, const std::set<std::int64_t>& assigned);

} // namespace sar
