#include <doctest.h>

#include <string>

#include "swarmsar/errors.hpp"
#include "swarmsar/scenario.hpp"
#include "swarmsar/sim_engine.hpp"
#include "swarmsar/svg_render.hpp"

using namespace sar;

namespace {

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
    std::size_t count = 0;
    std::size_t pos = text.find(needle);
    while (pos != std::string::npos) {
        ++count;
        pos = text.find(needle, pos + needle.size());
    }
    return count;
}

std::string toy_frames() {
    ScenarioConfig config;
    config.uav_count = 2;
    config.launch_position = {0, 0};
    config.synthetic = {8, 8, 450.0, {0, 0}, Vec2{1800, 1800}, 1000.0};
    std::string frames;
    run_scenario(config, [&](const std::string& line) { frames += line + "\n"; });
    return frames;
}

} // namespace

TEST_CASE("a two-UAV run renders two route polylines and per-UAV point groups") {
    std::string svg = render_frames_to_svg(toy_frames());
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(count_occurrences(svg, "<polyline class=\"route\"") == 2);
    CHECK(count_occurrences(svg, "<g class=\"uav-points\" data-uav=\"0\"") == 1);
    CHECK(count_occurrences(svg, "<g class=\"uav-points\" data-uav=\"1\"") == 1);
    CHECK(count_occurrences(svg, "class=\"egs\"") == 1);
    CHECK(count_occurrences(svg, "class=\"boundary\"") == 1);
    // self-contained: no external references
    CHECK(svg.find("href") == std::string::npos);
    CHECK(svg.find("url(") == std::string::npos);
}

TEST_CASE("the first frame places every UAV at the launch position") {
    // keep only the plan record and the t=0 frame
    std::string frames = toy_frames();
    std::string truncated;
    std::size_t pos = 0;
    int kept_frames = 0;
    while (pos < frames.size()) {
        std::size_t end = frames.find('\n', pos);
        std::string line = frames.substr(pos, end - pos);
        pos = end + 1;
        bool is_frame = line.find("\"type\":\"frame\"") != std::string::npos;
        if (is_frame && kept_frames >= 1) continue;
        if (is_frame) ++kept_frames;
        truncated += line + "\n";
    }

    std::string svg = render_frames_to_svg(truncated);
    // both UAV markers at the EGS pixel position (same cx/cy for both circles)
    CHECK(count_occurrences(svg, "<circle class=\"uav\"") == 2);
    std::size_t first = svg.find("<circle class=\"uav\"");
    std::size_t second = svg.find("<circle class=\"uav\"", first + 1);
    std::string first_line = svg.substr(first, svg.find('\n', first) - first);
    std::string second_line = svg.substr(second, svg.find('\n', second) - second);
    auto coords = [](const std::string& line) {
        std::size_t cx = line.find("cx=");
        std::size_t r = line.find(" r=");
        return line.substr(cx, r - cx);
    };
    CHECK(coords(first_line) == coords(second_line));
}

TEST_CASE("an empty frames file is rejected") {
    CHECK_THROWS_AS(render_frames_to_svg(""), FormatError);
}

TEST_CASE("a malformed record is rejected with its line number") {
    std::string frames = toy_frames();
    frames += "this is not json\n";
    int lines = 0;
    for (char c : frames)
        if (c == '\n') ++lines;
    std::string expected = "line " + std::to_string(lines);
    CHECK_THROWS_WITH_AS(render_frames_to_svg(frames), doctest::Contains(expected.c_str()),
                         FormatError);
}

TEST_CASE("frames without a plan record are rejected") {
    std::string only_frame =
        R"({"type":"frame","t_s":0.0,"update_index":0,"uavs":[],"visited_count":0,"survey_total":0})"
        "\n";
    CHECK_THROWS_WITH_AS(render_frames_to_svg(only_frame), doctest::Contains("no plan record"),
                         FormatError);
}
