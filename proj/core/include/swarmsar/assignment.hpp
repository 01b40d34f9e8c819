#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "swarmsar/fire_world.hpp"
#include "swarmsar/geometry.hpp"

namespace sar {

/// Weights of the greedy assignment metric: C = distance + lambda * penalty,
/// with penalty = max(0, |A_i| - mean(|A|)) * balance_coefficient.
struct GreedyParams {
    double lambda{1.0};
    double balance_coefficient{800.0};
};

/// Partition of survey-point ids across the fleet; one ordered id list per UAV.
struct Assignment {
    std::vector<std::vector<std::int64_t>> per_uav;

    int uav_count() const { return static_cast<int>(per_uav.size()); }
    std::size_t total_assigned() const;
};

enum class VerdictKind { Valid, ExtraOrInvented, Missing, Both };

/// Outcome of the set-equality check between a plan and the survey set.
/// `extra_or_invented` holds duplicated and unknown ids, `missing` the survey
/// ids left unassigned; both sorted ascending, each id listed once.
/// The raw cardinalities are kept for traceability against the count-only
/// comparison the validation branches describe.
struct ValidationVerdict {
    VerdictKind kind{VerdictKind::Valid};
    std::vector<std::int64_t> extra_or_invented;
    std::vector<std::int64_t> missing;
    std::size_t assigned_total{0};
    std::size_t expected_total{0};

    bool valid() const { return kind == VerdictKind::Valid; }
};

enum class CorrectionContext { Mission, Route };

/// max(0, counts[uav_index] - mean(counts)) * coefficient.
/// Throws DomainError on empty counts or out-of-range index.
double workload_penalty(std::span<const int> counts, int uav_index, double coefficient);

/// distance + lambda * penalty.
double assignment_metric(double distance_m, double penalty, double lambda);

/// Iteratively assigns the (UAV, point) pair with the smallest metric among
/// all unassigned points, re-evaluating workload penalties each iteration.
/// A UAV's position for the distance term is the last point assigned to it
/// (its launch position before any). Ties break to the lower UAV index, then
/// the lower point id.
Assignment greedy_assign(std::span<const Vec2> uav_positions, const SurveySet& survey,
                         const GreedyParams& params = {});

/// Set-equality verdict: Valid iff the assignment is an exact partition of the
/// survey set's ids.
ValidationVerdict validate_assignment(const Assignment& assignment, const SurveySet& survey);

/// The correction text appended to a planner prompt after a failed validation.
/// Both-failures concatenate the extra message then the missing message,
/// newline-separated. Throws ContractError when called on a Valid verdict.
std::string correction_message(const ValidationVerdict& verdict, CorrectionContext context);

namespace corrections {
inline constexpr const char* mission_extra =
    "You are hallucinating, creating more survey points than required. "
    "Do not invent, modify, or add any new points.";
inline constexpr const char* mission_missing =
    "You have not assigned all survey points to UAVs. "
    "You must allocate all survey points to UAVs.";
inline constexpr const char* route_extra =
    "You have used more survey points than required. "
    "Do not invent, modify, or add any new points.";
inline constexpr const char* route_missing =
    "You have generated a flight route not including all assigned survey points. "
    "You must visit every assigned survey point.";
} // namespace corrections

} // namespace sar
