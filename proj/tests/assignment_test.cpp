#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "swarmsar/assignment.hpp"
#include "swarmsar/errors.hpp"
#include "swarmsar/rng.hpp"

using namespace sar;

namespace {

SurveySet survey_from(std::vector<SurveyPoint> points) {
    SurveySet survey;
    survey.points = std::move(points);
    return survey;
}

/// Independent re-evaluation of the assignment metric loop, written as plain
/// nested scans so it cannot share a defect with greedy_assign.
std::vector<std::vector<std::int64_t>> greedy_oracle(std::vector<Vec2> uavs,
                                                     std::vector<SurveyPoint> points,
                                                     double lambda, double coefficient) {
    std::vector<std::vector<std::int64_t>> result(uavs.size());
    std::sort(points.begin(), points.end(),
              [](const SurveyPoint& a, const SurveyPoint& b) { return a.id < b.id; });
    std::vector<bool> taken(points.size(), false);
    std::size_t left = points.size();

    while (left > 0) {
        double total = 0.0;
        for (const auto& ids : result) total += static_cast<double>(ids.size());
        double mean = total / static_cast<double>(uavs.size());

        double best_metric = 0.0;
        std::size_t best_u = 0, best_p = 0;
        bool first = true;
        for (std::size_t u = 0; u < uavs.size(); ++u) {
            double over = static_cast<double>(result[u].size()) - mean;
            double penalty = (over > 0.0 ? over : 0.0) * coefficient;
            for (std::size_t p = 0; p < points.size(); ++p) {
                if (taken[p]) continue;
                double dx = uavs[u].x - points[p].position.x;
                double dy = uavs[u].y - points[p].position.y;
                double metric = std::sqrt(dx * dx + dy * dy) + lambda * penalty;
                if (first || metric < best_metric) {
                    best_metric = metric;
                    best_u = u;
                    best_p = p;
                    first = false;
                }
            }
        }
        result[best_u].push_back(points[best_p].id);
        uavs[best_u] = points[best_p].position;
        taken[best_p] = true;
        --left;
    }
    return result;
}

} // namespace

TEST_CASE("workload_penalty matches the hand-computed cases") {
    std::vector<int> equal{3, 3, 3};
    CHECK(workload_penalty(equal, 0, 800.0) == doctest::Approx(0.0));

    std::vector<int> skewed{5, 3, 1};
    CHECK(workload_penalty(skewed, 0, 800.0) == doctest::Approx(1600.0));

    std::vector<int> below{1, 3, 5};
    CHECK(workload_penalty(below, 0, 800.0) == doctest::Approx(0.0));
}

TEST_CASE("workload_penalty rejects bad input") {
    std::vector<int> empty;
    CHECK_THROWS_AS(workload_penalty(empty, 0, 800.0), DomainError);
    std::vector<int> one{2};
    CHECK_THROWS_AS(workload_penalty(one, 1, 800.0), DomainError);
    CHECK_THROWS_AS(workload_penalty(one, -1, 800.0), DomainError);
}

TEST_CASE("assignment_metric is distance plus weighted penalty") {
    CHECK(assignment_metric(1000.0, 0.0, 1.0) == doctest::Approx(1000.0));
    CHECK(assignment_metric(1000.0, 1600.0, 1.0) == doctest::Approx(2600.0));
    CHECK(assignment_metric(500.0, 800.0, 0.5) == doctest::Approx(900.0));
}

TEST_CASE("greedy_assign reproduces the worked 2-UAV example") {
    std::vector<Vec2> uavs{{0, 0}, {1000, 0}};
    SurveySet survey = survey_from({{1, {0, 100}}, {2, {0, 200}}, {3, {1000, 100}}});
    Assignment assignment = greedy_assign(uavs, survey, {1.0, 800.0});
    REQUIRE(assignment.per_uav.size() == 2);
    CHECK(assignment.per_uav[0] == std::vector<std::int64_t>{1, 2});
    CHECK(assignment.per_uav[1] == std::vector<std::int64_t>{3});
}

TEST_CASE("single-UAV greedy degenerates to nearest-first chaining") {
    std::vector<Vec2> uav{{0, 0}};
    SurveySet survey = survey_from({{1, {0, 300}}, {2, {0, 100}}, {3, {0, 200}}});
    Assignment assignment = greedy_assign(uav, survey, {1.0, 800.0});
    CHECK(assignment.per_uav[0] == std::vector<std::int64_t>{2, 3, 1});
}

TEST_CASE("greedy tie-breaks favor the lower UAV index and lower point id") {
    std::vector<Vec2> uavs{{0, 0}, {0, 0}};
    SurveySet survey = survey_from({{5, {100, 0}}, {9, {-100, 0}}});
    Assignment assignment = greedy_assign(uavs, survey, {1.0, 800.0});
    // both points equidistant from both UAVs: first pick goes to UAV 0, id 5;
    // the workload penalty then pushes id 9 to UAV 1
    CHECK(assignment.per_uav[0] == std::vector<std::int64_t>{5});
    CHECK(assignment.per_uav[1] == std::vector<std::int64_t>{9});
}

TEST_CASE("greedy output is always a valid partition") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        int n_uavs = 1 + static_cast<int>(rng() % 4);
        int n_points = 1 + static_cast<int>(rng() % 12);
        std::vector<Vec2> uavs;
        for (int u = 0; u < n_uavs; ++u)
            uavs.push_back({uniform_unit(rng) * 5000.0, uniform_unit(rng) * 5000.0});
        std::vector<SurveyPoint> points;
        for (int p = 0; p < n_points; ++p)
            points.push_back({p + 1, {uniform_unit(rng) * 5000.0, uniform_unit(rng) * 5000.0}});
        SurveySet survey = survey_from(points);
        Assignment assignment = greedy_assign(uavs, survey, {1.0, 800.0});
        CHECK(validate_assignment(assignment, survey).valid());
    }
}

TEST_CASE("greedy matches the independent brute-force oracle on 100 instances") {
    std::mt19937_64 rng(1009);
    for (int trial = 0; trial < 100; ++trial) {
        int n_uavs = 1 + static_cast<int>(rng() % 4);
        int n_points = 1 + static_cast<int>(rng() % 12);
        std::vector<Vec2> uavs;
        for (int u = 0; u < n_uavs; ++u)
            uavs.push_back({uniform_unit(rng) * 8000.0, uniform_unit(rng) * 8000.0});
        std::vector<SurveyPoint> points;
        for (int p = 0; p < n_points; ++p)
            points.push_back(
                {100 + p, {uniform_unit(rng) * 8000.0, uniform_unit(rng) * 8000.0}});

        Assignment got = greedy_assign(uavs, survey_from(points), {1.0, 800.0});
        auto expected = greedy_oracle(uavs, points, 1.0, 800.0);
        CHECK(got.per_uav == expected);
    }
}

TEST_CASE("the workload penalty narrows the assignment-count gap") {
    std::mt19937_64 rng(2718);
    int balanced_not_worse = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        int n_uavs = 2 + static_cast<int>(rng() % 3);
        int n_points = 6 + static_cast<int>(rng() % 7);
        std::vector<Vec2> uavs;
        for (int u = 0; u < n_uavs; ++u)
            uavs.push_back({uniform_unit(rng) * 5000.0, uniform_unit(rng) * 5000.0});
        std::vector<SurveyPoint> points;
        for (int p = 0; p < n_points; ++p)
            points.push_back({p, {uniform_unit(rng) * 5000.0, uniform_unit(rng) * 5000.0}});
        SurveySet survey = survey_from(points);

        auto gap = [](const Assignment& a) {
            std::size_t lo = a.per_uav.front().size(), hi = lo;
            for (const auto& ids : a.per_uav) {
                lo = std::min(lo, ids.size());
                hi = std::max(hi, ids.size());
            }
            return hi - lo;
        };
        std::size_t with_penalty = gap(greedy_assign(uavs, survey, {1.0, 800.0}));
        std::size_t without = gap(greedy_assign(uavs, survey, {0.0, 800.0}));
        if (with_penalty <= without) ++balanced_not_worse;
    }
    CHECK(balanced_not_worse >= 95);
}

TEST_CASE("greedy output does not depend on the input point order") {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 20; ++trial) {
        int n_uavs = 1 + static_cast<int>(rng() % 3);
        std::vector<Vec2> uavs;
        for (int u = 0; u < n_uavs; ++u)
            uavs.push_back({uniform_unit(rng) * 1000.0, uniform_unit(rng) * 1000.0});
        std::vector<SurveyPoint> points;
        for (int p = 0; p < 8; ++p)
            points.push_back({p, {uniform_unit(rng) * 1000.0, uniform_unit(rng) * 1000.0}});

        Assignment a = greedy_assign(uavs, survey_from(points), {1.0, 800.0});
        std::shuffle(points.begin(), points.end(), rng);
        Assignment b = greedy_assign(uavs, survey_from(points), {1.0, 800.0});
        CHECK(a.per_uav == b.per_uav);
    }
}

TEST_CASE("validate_assignment classifies partitions") {
    SurveySet survey = survey_from({{1, {}}, {2, {}}, {3, {}}});

    SUBCASE("exact partition is Valid") {
        Assignment a{{{1, 2}, {3}}};
        ValidationVerdict v = validate_assignment(a, survey);
        CHECK(v.kind == VerdictKind::Valid);
        CHECK(v.valid());
        CHECK(v.assigned_total == 3);
        CHECK(v.expected_total == 3);
    }
    SUBCASE("unknown id is ExtraOrInvented") {
        Assignment a{{{1, 2, 4}, {3}}};
        ValidationVerdict v = validate_assignment(a, survey);
        CHECK(v.kind == VerdictKind::ExtraOrInvented);
        CHECK(v.extra_or_invented == std::vector<std::int64_t>{4});
        CHECK(v.missing.empty());
    }
    SUBCASE("duplicate plus omission is Both") {
        // a cardinality-only check would pass this: 3 assigned, 3 expected
        Assignment a{{{1, 2}, {2}}};
        ValidationVerdict v = validate_assignment(a, survey);
        CHECK(v.kind == VerdictKind::Both);
        CHECK(v.extra_or_invented == std::vector<std::int64_t>{2});
        CHECK(v.missing == std::vector<std::int64_t>{3});
        CHECK(v.assigned_total == v.expected_total);
    }
    SUBCASE("unassigned ids are Missing") {
        Assignment a{{{1}, {}}};
        ValidationVerdict v = validate_assignment(a, survey);
        CHECK(v.kind == VerdictKind::Missing);
        CHECK(v.missing == std::vector<std::int64_t>{2, 3});
    }
}

TEST_CASE("correction_message returns the exact workflow strings") {
    ValidationVerdict extra;
    extra.kind = VerdictKind::ExtraOrInvented;
    ValidationVerdict missing;
    missing.kind = VerdictKind::Missing;
    ValidationVerdict both;
    both.kind = VerdictKind::Both;

    CHECK(correction_message(extra, CorrectionContext::Mission) ==
          "You are hallucinating, creating more survey points than required. Do not invent, "
          "modify, or add any new points.");
    CHECK(correction_message(missing, CorrectionContext::Mission) ==
          "You have not assigned all survey points to UAVs. You must allocate all survey points "
          "to UAVs.");
    CHECK(correction_message(extra, CorrectionContext::Route) ==
          "You have used more survey points than required. Do not invent, modify, or add any new "
          "points.");
    CHECK(correction_message(missing, CorrectionContext::Route) ==
          "You have generated a flight route not including all assigned survey points. You must "
          "visit every assigned survey point.");
    CHECK(correction_message(both, CorrectionContext::Mission) ==
          correction_message(extra, CorrectionContext::Mission) + "\n" +
              correction_message(missing, CorrectionContext::Mission));
}

TEST_CASE("correction_message on a Valid verdict is a contract violation") {
    ValidationVerdict valid;
    CHECK_THROWS_AS(correction_message(valid, CorrectionContext::Mission), ContractError);
}
