#include "swarmsar/assignment.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "swarmsar/errors.hpp"

namespace sar {

std::size_t Assignment::total_assigned() const {
    std::size_t n = 0;
    for (const auto& ids : per_uav) n += ids.size();
    return n;
}

double workload_penalty(std::span<const int> counts, int uav_index, double coefficient) {
    if (counts.empty())
        throw DomainError("workload_penalty: empty counts");
    if (uav_index < 0 || uav_index >= static_cast<int>(counts.size()))
        throw DomainError("workload_penalty: uav_index out of range");
    double mean = std::accumulate(counts.begin(), counts.end(), 0.0) /
                  static_cast<double>(counts.size());
    return std::max(0.0, static_cast<double>(counts[static_cast<std::size_t>(uav_index)]) - mean) *
           coefficient;
}

double assignment_metric(double distance_m, double penalty, double lambda) {
    return distance_m + lambda * penalty;
}

Assignment greedy_assign(std::span<const Vec2> uav_positions, const SurveySet& survey,
                         const GreedyParams& params) {
    const int n_uavs = static_cast<int>(uav_positions.size());
    if (n_uavs < 1)
        throw DomainError("greedy_assign: need at least one UAV");
    if (survey.points.empty())
        throw DomainError("greedy_assign: empty survey set");

    // Candidates sorted by id so that the scan order, not the caller's point
    // order, decides ties.
    std::vector<const SurveyPoint*> remaining;
    remaining.reserve(survey.points.size());
    for (const auto& p : survey.points) remaining.push_back(&p);
    std::sort(remaining.begin(), remaining.end(),
              [](const SurveyPoint* a, const SurveyPoint* b) { return a->id < b->id; });

    Assignment assignment;
    assignment.per_uav.assign(static_cast<std::size_t>(n_uavs), {});
    std::vector<Vec2> current(uav_positions.begin(), uav_positions.end());
    std::vector<int> counts(static_cast<std::size_t>(n_uavs), 0);

    while (!remaining.empty()) {
        double best = std::numeric_limits<double>::infinity();
        int best_uav = -1;
        std::size_t best_slot = 0;
        for (int i = 0; i < n_uavs; ++i) {
            double penalty = workload_penalty(counts, i, params.balance_coefficient);
            for (std::size_t s = 0; s < remaining.size(); ++s) {
                double metric = assignment_metric(
                    distance(current[static_cast<std::size_t>(i)], remaining[s]->position),
                    penalty, params.lambda);
                if (metric < best) {
                    best = metric;
                    best_uav = i;
                    best_slot = s;
                }
            }
        }
        const SurveyPoint* chosen = remaining[best_slot];
        assignment.per_uav[static_cast<std::size_t>(best_uav)].push_back(chosen->id);
        current[static_cast<std::size_t>(best_uav)] = chosen->position;
        ++counts[static_cast<std::size_t>(best_uav)];
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_slot));
    }
    return assignment;
}

ValidationVerdict validate_assignment(const Assignment& assignment, const SurveySet& survey) {
    ValidationVerdict verdict;
    verdict.expected_total = survey.points.size();
    verdict.assigned_total = assignment.total_assigned();

    std::set<std::int64_t> known;
    for (const auto& p : survey.points) known.insert(p.id);

    std::map<std::int64_t, int> seen;
    for (const auto& ids : assignment.per_uav)
        for (std::int64_t id : ids) ++seen[id];

    for (const auto& [id, count] : seen)
        if (count > 1 || !known.count(id)) verdict.extra_or_invented.push_back(id);
    for (std::int64_t id : known)
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

std::string correction_message(const ValidationVerdict& verdict, CorrectionContext context) {
    if (verdict.valid())
        throw ContractError("correction_message: called on a Valid verdict");

    const char* extra = context == CorrectionContext::Mission ? corrections::mission_extra
                                                              : corrections::route_extra;
    const char* missing = context == CorrectionContext::Mission ? corrections::mission_missing
                                                                : corrections::route_missing;
    switch (verdict.kind) {
        case VerdictKind::ExtraOrInvented:
            return extra;
        case VerdictKind::Missing:
            return missing;
        case VerdictKind::Both:
            return std::string(extra) + "\n" + missing;
        case VerdictKind::Valid:
            break;
    }
    throw ContractError("correction_message: unreachable");
}

} // namespace sar
