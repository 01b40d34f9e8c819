#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "swarmsar/errors.hpp"
#include "swarmsar/sim_engine.hpp"

using namespace sar;

namespace {

ScenarioConfig base_config() {
    ScenarioConfig config;
    config.uav_count = 1;
    config.launch_position = {225, 225};
    config.frame_interval_s = 5.0;
    return config;
}

/// Writes a 1x4-cell column mask (450 m cells) whose top three cells burn,
/// giving survey points at (225,675), (225,1125), (225,1575).
std::string column_mask_path() {
    auto path = std::filesystem::temp_directory_path() / "column_mask.txt";
    std::ofstream out(path);
    out << "width=1\nheight=4\nresolution_m=450\norigin_x_m=0\norigin_y_m=0\n"
        << "0\n1\n1\n1\n";
    return path.string();
}

World collinear_world(ScenarioConfig config) {
    config.mask_path = column_mask_path();
    World world = make_world(config);
    dispatch_mission(world);
    return world;
}

std::vector<nlohmann::json> parse_lines(const std::string& text) {
    std::vector<nlohmann::json> records;
    std::stringstream stream(text);
    std::string line;
    while (std::getline(stream, line))
        if (!line.empty()) records.push_back(nlohmann::json::parse(line));
    return records;
}

} // namespace

TEST_CASE("power_draw matches the platform constants") {
    ScenarioConfig config = base_config();
    CHECK(power_draw(15.0, false, config) == doctest::Approx(170.0));
    CHECK(power_draw(0.0, true, config) == doctest::Approx(55.0));
    CHECK(power_draw(10.0, false, config) == doctest::Approx(130.0));
    CHECK_THROWS_AS(power_draw(-1.0, false, config), DomainError);
}

TEST_CASE("detect_survivors uses an inclusive range") {
    std::vector<Vec2> survivors{{1000, 0}, {1600, 0}, {1500, 0}};
    auto detected = detect_survivors({0, 0}, survivors, 1500.0);
    CHECK(detected == std::vector<int>{0, 2});
    CHECK_THROWS_AS(detect_survivors({0, 0}, survivors, 0.0), DomainError);
}

TEST_CASE("coverage_rate is the visited fraction") {
    SurveySet survey;
    for (int i = 0; i < 300; ++i) survey.points.push_back({i, {}});
    std::set<std::int64_t> visited;
    for (int i = 0; i < 150; ++i) visited.insert(i);
    CHECK(coverage_rate(visited, survey) == doctest::Approx(0.5));
    for (int i = 150; i < 300; ++i) visited.insert(i);
    CHECK(coverage_rate(visited, survey) == doctest::Approx(1.0));
    CHECK(coverage_rate({}, survey) == doctest::Approx(0.0));

    SurveySet empty;
    CHECK_THROWS_AS(coverage_rate(visited, empty), DomainError);
}

TEST_CASE("a 450 m leg at cruise speed completes in one 30 s step") {
    World world = collinear_world(base_config());
    REQUIRE(world.uavs.size() == 1);
    const double initial = world.uavs[0].remaining_energy_j;

    step(world, 30.0);
    UavState& uav = world.uavs[0];
    CHECK(uav.position == Vec2{225.0, 675.0});
    CHECK(uav.visited.size() == 1);
    CHECK(uav.energy_consumed_j == doctest::Approx(170.0 * 30.0));
    CHECK(initial - uav.remaining_energy_j == doctest::Approx(170.0 * 30.0));
}

TEST_CASE("a depleted UAV is frozen apart from time") {
    World world = collinear_world(base_config());
    world.uavs[0].status = UavStatus::Depleted;
    world.uavs[0].remaining_energy_j = 0.0;
    Vec2 before = world.uavs[0].position;

    step(world, 10.0);
    CHECK(world.uavs[0].position == before);
    CHECK(world.uavs[0].energy_consumed_j == doctest::Approx(0.0));
    CHECK(world.time_s == doctest::Approx(10.0));
}

TEST_CASE("a cruising UAV with 1700 J depletes after exactly 10 s") {
    World world = collinear_world(base_config());
    world.uavs[0].remaining_energy_j = 1700.0;
    for (int i = 0; i < 12; ++i) step(world, 1.0);
    CHECK(world.uavs[0].status == UavStatus::Depleted);
    REQUIRE(world.uavs[0].depleted_at_s.has_value());
    CHECK(*world.uavs[0].depleted_at_s == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("endurance at constant cruise matches the closed form") {
    // full default battery: 9600 mAh * 14.8 V * 3.6 = 511488 J; at 170 W the
    // battery lasts 3008.75 s
    ScenarioConfig config = base_config();
    CHECK(config.energy_capacity_j() == doctest::Approx(511488.0));

    World world;
    world.config = config;
    world.survey.points = {{1, {1e7, 0}}};
    world.positions = {{1, {1e7, 0}}};
    world.uavs.push_back({});
    world.uavs[0].remaining_energy_j = config.energy_capacity_j();
    world.uavs[0].route = {0, {225, 225}, {1}};
    world.uavs[0].status = UavStatus::EnRoute;

    const double dt = 1.0;
    while (world.uavs[0].status != UavStatus::Depleted) step(world, dt);
    REQUIRE(world.uavs[0].depleted_at_s.has_value());
    CHECK(*world.uavs[0].depleted_at_s ==
          doctest::Approx(511488.0 / 170.0).epsilon(dt / 3008.0));
    CHECK(world.uavs[0].energy_consumed_j == doctest::Approx(511488.0));
}

TEST_CASE("dwell delays the visit and the completion instant") {
    ScenarioConfig config = base_config();
    config.dwell_time_s = 10.0;
    config.mask_path = column_mask_path();
    MetricsReport report = run_scenario(config);
    REQUIRE(report.per_update.size() == 1);
    // three 30 s legs plus three 10 s dwells
    CHECK(report.per_update[0].completion_time_s.has_value());
    CHECK(*report.per_update[0].completion_time_s == doctest::Approx(120.0));
}

TEST_CASE("inference latency holds the UAV before flight") {
    ScenarioConfig config = base_config();
    config.inference_latency_s = 2.0;
    config.mask_path = column_mask_path();
    MetricsReport report = run_scenario(config);
    REQUIRE(report.per_update.size() == 1);
    CHECK(*report.per_update[0].completion_time_s == doctest::Approx(92.0));
}

TEST_CASE("three collinear points complete in 90 s with full coverage") {
    ScenarioConfig config = base_config();
    config.mask_path = column_mask_path();
    MetricsReport report = run_scenario(config);

    REQUIRE(report.per_update.size() == 1);
    const UpdateMetrics& m = report.per_update[0];
    CHECK(m.survey_total == 3);
    CHECK(m.coverage_rate == doctest::Approx(1.0));
    REQUIRE(m.completion_time_s.has_value());
    CHECK(*m.completion_time_s == doctest::Approx(90.0).epsilon(1e-9));
    CHECK(report.mission_complete);
    // with dwell 0 and one UAV, completion time is exactly route length / speed
    CHECK(m.per_uav[0].distance_flown_m == doctest::Approx(1350.0));
    CHECK(*m.completion_time_s ==
          doctest::Approx(m.per_uav[0].distance_flown_m / config.cruise_speed_mps));
}

TEST_CASE("a battery worth about a minute of cruise strands the third point") {
    ScenarioConfig config = base_config();
    config.mask_path = column_mask_path();
    // energy for 60.5 s of cruise: reaches the second point at 60 s, dies on
    // the final leg
    config.battery_capacity_mah = 170.0 * 60.5 / (config.battery_voltage_v * 3.6);
    MetricsReport report = run_scenario(config);

    REQUIRE(report.per_update.size() == 1);
    const UpdateMetrics& m = report.per_update[0];
    CHECK(m.coverage_rate == doctest::Approx(2.0 / 3.0));
    CHECK_FALSE(m.completion_time_s.has_value());
    CHECK(m.per_uav[0].depleted);
    CHECK_FALSE(report.mission_complete);
}

TEST_CASE("the energy ledger balances to 1e-6 relative") {
    ScenarioConfig config = base_config();
    config.uav_count = 2;
    config.dwell_time_s = 3.0;
    config.inference_latency_s = 1.5;
    config.mask_path = column_mask_path();

    World world = make_world(config);
    dispatch_mission(world);
    const double initial = config.energy_capacity_j();
    for (int i = 0; i < 200; ++i) step(world, 1.0);

    for (const auto& uav : world.uavs) {
        double accounted = uav.energy_consumed_j + uav.remaining_energy_j;
        CHECK(std::abs(accounted - initial) / initial < 1e-6);
    }
}

TEST_CASE("survivors near waypoints are detected at arrival") {
    ScenarioConfig config = base_config();
    config.mask_path = column_mask_path();
    config.survivors = {{225, 1600}, {100000, 100000}};
    MetricsReport report = run_scenario(config);

    REQUIRE(report.detections.size() == 1);
    CHECK(report.detections[0].survivor_index == 0);
    CHECK(report.detections[0].uav_index == 0);
    // 925 m from the first waypoint (225,675), reached at t=30
    CHECK(report.detections[0].t_s == doctest::Approx(30.0));
}

TEST_CASE("boundary update with an unchanged mask keeps ids and replans the rest") {
    ScenarioConfig config = base_config();
    config.uav_count = 2;
    config.mask_path = column_mask_path();
    World world = make_world(config);
    dispatch_mission(world);

    step(world, 30.0); // someone reaches the first point
    REQUIRE(world.visited_union.size() >= 1);
    auto ids_before = world.visited_union;
    SurveySet survey_before = world.survey;

    on_boundary_update(world, world.mask);
    CHECK(world.survey.points.size() == survey_before.points.size());
    for (std::size_t i = 0; i < world.survey.points.size(); ++i)
        CHECK(world.survey.points[i].id == survey_before.points[i].id);
    CHECK(world.visited_union == ids_before);
    for (const auto& uav : world.uavs)
        for (std::int64_t id : uav.route.waypoints) CHECK_FALSE(ids_before.count(id));
}

TEST_CASE("a mask grown by 4 cells adds exactly 4 survey points to the plan") {
    ScenarioConfig config = base_config();
    config.uav_count = 2;
    config.mask_path = column_mask_path();
    World world = make_world(config);
    dispatch_mission(world);
    const std::size_t before = world.survey.points.size();
    auto ids_before = [&] {
        std::set<std::int64_t> ids;
        for (const auto& p : world.survey.points) ids.insert(p.id);
        return ids;
    }();

    // widen the raster so the fire can grow sideways by 4 new 450 m cells
    FireMask grown;
    grown.width = 2;
    grown.height = 4;
    grown.resolution_m = 450.0;
    grown.burning.assign(8, 0);
    for (int y = 1; y < 4; ++y) grown.set(0, y, true); // original column
    grown.set(0, 0, true);                             // growth: south cell
    for (int y = 0; y < 3; ++y) grown.set(1, y, true); // growth: 3 east cells
    on_boundary_update(world, grown);
    CHECK(world.survey.points.size() == before + 4);

    std::set<std::int64_t> assigned;
    for (const auto& uav : world.uavs)
        for (std::int64_t id : uav.route.waypoints) assigned.insert(id);
    int new_ids_assigned = 0;
    for (const auto& p : world.survey.points) {
        if (!world.visited_union.count(p.id)) CHECK(assigned.count(p.id));
        if (!ids_before.count(p.id) && assigned.count(p.id)) ++new_ids_assigned;
    }
    CHECK(new_ids_assigned == 4);
}

TEST_CASE("a depleted UAV is excluded from replanning") {
    ScenarioConfig config = base_config();
    config.uav_count = 3;
    config.mask_path = column_mask_path();
    World world = make_world(config);
    dispatch_mission(world);

    world.uavs[1].status = UavStatus::Depleted;
    world.uavs[1].remaining_energy_j = 0.0;
    on_boundary_update(world, world.mask);

    CHECK(world.uavs[1].route.waypoints.empty());
    std::set<std::int64_t> assigned;
    std::size_t assigned_total = 0;
    for (const auto& uav : world.uavs)
        for (std::int64_t id : uav.route.waypoints) {
            assigned.insert(id);
            ++assigned_total;
        }
    std::set<std::int64_t> unvisited;
    for (const auto& p : world.survey.points)
        if (!world.visited_union.count(p.id)) unvisited.insert(p.id);
    CHECK(assigned == unvisited);
    CHECK(assigned_total == unvisited.size()); // a partition, not just a cover
}

TEST_CASE("coverage is non-decreasing and UAVs never teleport") {
    ScenarioConfig config = base_config();
    config.uav_count = 3;
    config.mode = SimMode::Dynamic;
    config.updates = 2;
    config.spread.ignition_probability = 0.0; // fixed mask
    config.update_interval_s = 40.0;
    config.synthetic = {8, 8, 450.0, {0, 0}, Vec2{1800, 1800}, 1400.0};

    std::string frames_text;
    run_scenario(config, [&](const std::string& line) { frames_text += line + "\n"; });

    auto records = parse_lines(frames_text);
    std::size_t last_visited = 0;
    std::map<int, Vec2> last_pos;
    double last_t = 0.0;
    for (const auto& record : records) {
        if (record["type"] != "frame") continue;
        std::size_t visited = record["visited_count"].get<std::size_t>();
        CHECK(visited >= last_visited);
        last_visited = visited;

        double t = record["t_s"].get<double>();
        for (const auto& u : record["uavs"]) {
            int index = u["index"].get<int>();
            Vec2 pos{u["x_m"].get<double>(), u["y_m"].get<double>()};
            if (last_pos.count(index) && t > last_t) {
                double moved = distance(last_pos[index], pos);
                CHECK(moved <= config.cruise_speed_mps * (t - last_t) + 1e-9);
            }
            last_pos[index] = pos;
        }
        last_t = t;
    }
}

TEST_CASE("dynamic mode finishes a growing fire across updates") {
    ScenarioConfig config = base_config();
    config.uav_count = 2;
    config.mode = SimMode::Dynamic;
    config.updates = 3;
    config.update_interval_s = 60.0;
    config.spread.ignition_probability = 1.0;
    config.spread.steps_per_update = 1;
    config.mask_path = column_mask_path();

    MetricsReport report = run_scenario(config);
    CHECK(report.mode == "dynamic");
    CHECK(report.per_update.size() == 3);
    CHECK(report.mission_complete);
    CHECK(report.per_update.back().coverage_rate == doctest::Approx(1.0));
    // the fire grew, so the final survey is larger than the first
    CHECK(report.per_update.back().survey_total > report.per_update.front().survey_total);
}

TEST_CASE("repeated seeded runs are byte-identical") {
    ScenarioConfig config = base_config();
    config.uav_count = 3;
    config.updates = 2;
    config.seed = 11;
    config.spread.ignition_probability = 0.4;
    config.synthetic = {16, 16, 300.0, {0, 0}, std::nullopt, 900.0};

    std::string frames_a, frames_b;
    MetricsReport a = run_scenario(config, [&](const std::string& l) { frames_a += l + "\n"; });
    MetricsReport b = run_scenario(config, [&](const std::string& l) { frames_b += l + "\n"; });
    CHECK(metrics_to_jsonl(a) == metrics_to_jsonl(b));
    CHECK(frames_a == frames_b);
}

TEST_CASE("larger fleets do not finish later on a fixed scenario") {
    ScenarioConfig config = base_config();
    config.launch_position = {0, 0};
    config.seed = 3;
    config.synthetic = {24, 24, 300.0, {0, 0}, std::nullopt, 2500.0};

    config.uav_count = 2;
    MetricsReport small = run_scenario(config);
    config.uav_count = 4;
    MetricsReport large = run_scenario(config);

    REQUIRE(small.per_update[0].completion_time_s.has_value());
    REQUIRE(large.per_update[0].completion_time_s.has_value());
    CHECK(*large.per_update[0].completion_time_s <= *small.per_update[0].completion_time_s);
}

TEST_CASE("metrics serialization carries one update record plus a summary") {
    ScenarioConfig config = base_config();
    config.mask_path = column_mask_path();
    MetricsReport report = run_scenario(config);
    auto records = parse_lines(metrics_to_jsonl(report));
    REQUIRE(records.size() == 2);
    CHECK(records[0]["type"] == "update");
    CHECK(records[0]["survey_total"] == 3);
    CHECK(records[0]["coverage_rate"] == 1.0);
    CHECK(records[1]["type"] == "summary");
    CHECK(records[1]["mission_complete"] == true);
}

TEST_CASE("step rejects a non-positive dt") {
    World world = collinear_world(base_config());
    CHECK_THROWS_AS(step(world, 0.0), DomainError);
}
