#include "swarmsar/routing.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "swarmsar/errors.hpp"

namespace sar {

namespace {

Vec2 lookup(const PointLookup& positions, std::int64_t id) {
    auto it = positions.find(id);
    if (it == positions.end())
        throw ConsistencyError("waypoint id " + std::to_string(id) + " has no known position");
    return it->second;
}

} // namespace

PointLookup make_point_lookup(std::span<const SurveyPoint> points) {
    PointLookup lookup;
    lookup.reserve(points.size());
    for (const auto& p : points) lookup.emplace(p.id, p.position);
    return lookup;
}

PointLookup make_point_lookup(const SurveySet& survey) {
    return make_point_lookup(std::span<const SurveyPoint>(survey.points));
}

Route nn_route(Vec2 start, std::span<const SurveyPoint> assigned, int uav_index) {
    Route route;
    route.uav_index = uav_index;
    route.start_position = start;
    if (assigned.empty()) return route;

    std::vector<const SurveyPoint*> remaining;
    remaining.reserve(assigned.size());
    for (const auto& p : assigned) remaining.push_back(&p);
    std::sort(remaining.begin(), remaining.end(),
              [](const SurveyPoint* a, const SurveyPoint* b) { return a->id < b->id; });

    Vec2 here = start;
    while (!remaining.empty()) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_slot = 0;
        for (std::size_t s = 0; s < remaining.size(); ++s) {
            double d = distance(here, remaining[s]->position);
            if (d < best) {
                best = d;
                best_slot = s;
            }
        }
        route.waypoints.push_back(remaining[best_slot]->id);
        here = remaining[best_slot]->position;
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_slot));
    }
    return route;
}

Route two_opt(const Route& route, const PointLookup& positions, int max_passes) {
    Route improved = route;
    const std::size_t n = improved.waypoints.size();
    if (n < 2) return improved;

    // Guard against float round-trip cycling on near-equal alternatives.
    constexpr double kMinGain = 1e-9;

    auto pos_before = [&](std::size_t i) {
        return i == 0 ? improved.start_position : lookup(positions, improved.waypoints[i - 1]);
    };

    for (int pass = 0; pass < max_passes; ++pass) {
        bool any_improvement = false;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                // Reversing waypoints[i..j] replaces edges (i-1,i) and (j,j+1)
                // with (i-1,j) and (i,j+1); the last waypoint has no out-edge.
                Vec2 before = pos_before(i);
                Vec2 wi = lookup(positions, improved.waypoints[i]);
                Vec2 wj = lookup(positions, improved.waypoints[j]);
                double removed = distance(before, wi);
                double added = distance(before, wj);
                if (j + 1 < n) {
                    Vec2 after = lookup(positions, improved.waypoints[j + 1]);
                    removed += distance(wj, after);
                    added += distance(wi, after);
                }
                if (removed - added > kMinGain) {
                    std::reverse(improved.waypoints.begin() + static_cast<std::ptrdiff_t>(i),
                                 improved.waypoints.begin() + static_cast<std::ptrdiff_t>(j) + 1);
                    any_improvement = true;
                }
            }
        }
        if (!any_improvement) break;
    }
    return improved;
}

double route_length(const Route& route, const PointLookup& positions) {
    double total = 0.0;
    Vec2 here = route.start_position;
    for (std::int64_t id : route.waypoints) {
        Vec2 next = lookup(positions, id);
        total += distance(here, next);
        here = next;
    }
    return total;
}

ValidationVerdict validate_route(const Route& route, const std::set<std::int64_t>& assigned) {
    ValidationVerdict verdict;
    verdict.expected_total = assigned.size();
    verdict.assigned_total = route.waypoints.size();

    std::map<std::int64_t, int> seen;
    for (std::int64_t id : route.waypoints) ++seen[id];

    for (const auto& [id, count] : seen)
        if (count > 1 || !assigned.count(id)) verdict.extra_or_invented.push_back(id);
    for (std::int64_t id : assigned)
        if (!seen.count(id)) verdict.missing.push_back(id);

    if (verdict.extra_or_invented.empty() && verdict.missing.empty())
        verdict.kind = VerdictKind::Valid;
    else if (verdict.missing.empty())
        verdict.kind = VerdictKind::ExtraOrInvented;
    else if (verdict.extra_or_invented.empty())
        verdict.kind = VerdictKind::Missing;
    else
        verdict.kind = VerdictKind::Both;
    return verdict;
}

} // namespace sar
