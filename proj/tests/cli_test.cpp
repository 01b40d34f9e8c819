#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "swarmsar/errors.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    std::string command = std::string(SWARMSAR_BIN) + " " + args + " > /dev/null 2>&1";
    int status = std::system(command.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

fs::path temp_root() {
    fs::path root = fs::temp_directory_path() / "swarmsar_cli_test";
    fs::create_directories(root);
    return root;
}

fs::path write_scenario(const std::string& name, const std::string& content) {
    fs::path path = temp_root() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

const char* kToyScenario =
    "uav.count = 2\n"
    "fire.synthetic.width_cells = 12\n"
    "fire.synthetic.height_cells = 12\n"
    "fire.synthetic.resolution_m = 150\n"
    "fire.synthetic.radius_m = 500\n"
    "fire.updates = 2\n";

} // namespace

TEST_CASE("validate-config accepts a minimal scenario and rejects bad keys") {
    fs::path good = write_scenario("good.cfg", "uav.count = 8\n");
    CHECK(run_cli("validate-config " + good.string()) == 0);

    fs::path bad = write_scenario("bad.cfg", "uav.count = 8\nuav.speed_mps = -3\n");
    CHECK(run_cli("validate-config " + bad.string()) == 1);

    fs::path empty = write_scenario("empty.cfg", "");
    CHECK(run_cli("validate-config " + empty.string()) == 1);
}

TEST_CASE("run exits 0 on full coverage and writes the three artifacts") {
    fs::path scenario = write_scenario("toy.cfg", kToyScenario);
    fs::path out = temp_root() / "run_ok";
    fs::remove_all(out);
    CHECK(run_cli("run --scenario " + scenario.string() + " --out " + out.string() +
                  " --seed 5") == 0);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(fs::exists(out / "metrics.jsonl"));
    CHECK(fs::exists(out / "frames.jsonl"));
}

TEST_CASE("run exits 2 when the mission cannot be completed") {
    // a battery good for roughly a minute of cruise cannot cover the region
    fs::path scenario = write_scenario(
        "starved.cfg", std::string(kToyScenario) + "uav.battery_mah = 200\n");
    fs::path out = temp_root() / "run_starved";
    fs::remove_all(out);
    CHECK(run_cli("run --scenario " + scenario.string() + " --out " + out.string()) == 2);
}

TEST_CASE("run exits 1 on errors") {
    fs::path scenario = write_scenario("toy2.cfg", kToyScenario);
    SUBCASE("nonexistent out-dir parent") {
        CHECK(run_cli("run --scenario " + scenario.string() +
                      " --out /nonexistent_root_dir/sub/out") == 1);
    }
    SUBCASE("invalid config") {
        fs::path bad = write_scenario("bad2.cfg", "uav.count = -1\n");
        CHECK(run_cli("run --scenario " + bad.string() + " --out " +
                      (temp_root() / "never").string()) == 1);
    }
    SUBCASE("invalid --set override") {
        CHECK(run_cli("run --scenario " + scenario.string() + " --out " +
                      (temp_root() / "never2").string() + " --set uav.speed_mps=0") == 1);
    }
}

TEST_CASE("the manifest is written before the simulation starts") {
    // remote planner with nothing listening: the run fails, but the manifest
    // must already be on disk
    fs::path scenario = write_scenario(
        "doomed.cfg", std::string(kToyScenario) +
                          "planner.kind = remote\n"
                          "planner.url = http://127.0.0.1:1/v1/chat/completions\n"
                          "planner.timeout_s = 0.2\n"
                          "planner.max_transport_retries = 0\n");
    fs::path out = temp_root() / "doomed_out";
    fs::remove_all(out);
    setenv("PLANNER_API_KEY", "test-key", 1);
    CHECK(run_cli("run --scenario " + scenario.string() + " --out " + out.string()) == 1);
    unsetenv("PLANNER_API_KEY");
    CHECK(fs::exists(out / "manifest.json"));
    CHECK_FALSE(fs::exists(out / "metrics.jsonl"));
}

TEST_CASE("a manifest re-run reproduces metrics and frames byte-identically") {
    fs::path scenario = write_scenario("toy3.cfg", kToyScenario);
    fs::path first = temp_root() / "repro_a";
    fs::path second = temp_root() / "repro_b";
    fs::remove_all(first);
    fs::remove_all(second);

    REQUIRE(run_cli("run --scenario " + scenario.string() + " --out " + first.string() +
                    " --seed 11") == 0);
    REQUIRE(run_cli("run --manifest " + (first / "manifest.json").string() + " --out " +
                    second.string()) == 0);

    CHECK(slurp(first / "metrics.jsonl") == slurp(second / "metrics.jsonl"));
    CHECK(slurp(first / "frames.jsonl") == slurp(second / "frames.jsonl"));
}

TEST_CASE("--set overrides reach the resolved config") {
    fs::path scenario = write_scenario("toy4.cfg", kToyScenario);
    fs::path out = temp_root() / "with_set";
    fs::remove_all(out);
    REQUIRE(run_cli("run --scenario " + scenario.string() + " --out " + out.string() +
                    " --set uav.speed_mps=12 --planner greedy") == 0);
    std::string manifest = slurp(out / "manifest.json");
    CHECK(manifest.find("\"uav.speed_mps\": \"12\"") != std::string::npos);
    CHECK(manifest.find("\"planner.kind\": \"greedy\"") != std::string::npos);
}

TEST_CASE("sweep writes per-run outputs and a summary") {
    fs::path scenario = write_scenario("toy5.cfg", kToyScenario);
    fs::path out = temp_root() / "sweep";
    fs::remove_all(out);
    CHECK(run_cli("sweep --scenario " + scenario.string() +
                  " --fleets 2,3 --seeds 1..2 --out " + out.string()) == 0);
    CHECK(fs::exists(out / "fleet2_seed1" / "metrics.jsonl"));
    CHECK(fs::exists(out / "fleet3_seed2" / "metrics.jsonl"));
    std::string summary = slurp(out / "summary.jsonl");
    CHECK(summary.find("\"type\":\"run\"") != std::string::npos);
    CHECK(summary.find("\"type\":\"fleet_summary\"") != std::string::npos);

    // one run line per (fleet, seed) pair plus one summary line per fleet
    int lines = 0;
    for (char c : summary)
        if (c == '\n') ++lines;
    CHECK(lines == 6);
}

TEST_CASE("sweep rejects empty lists") {
    fs::path scenario = write_scenario("toy6.cfg", kToyScenario);
    CHECK(run_cli("sweep --scenario " + scenario.string() + " --fleets , --seeds 1 --out " +
                  (temp_root() / "sweep_bad").string()) == 1);
}

TEST_CASE("render produces an SVG from a run's frames") {
    fs::path scenario = write_scenario("toy7.cfg", kToyScenario);
    fs::path out = temp_root() / "render_run";
    fs::remove_all(out);
    REQUIRE(run_cli("run --scenario " + scenario.string() + " --out " + out.string()) == 0);

    fs::path svg = temp_root() / "mission.svg";
    CHECK(run_cli("render --frames " + (out / "frames.jsonl").string() + " --svg " +
                  svg.string()) == 0);
    std::string content = slurp(svg);
    CHECK(content.rfind("<svg", 0) == 0);
    CHECK(content.find("</svg>") != std::string::npos);

    fs::path empty = write_scenario("empty_frames.jsonl", "");
    CHECK(run_cli("render --frames " + empty.string() + " --svg " +
                  (temp_root() / "bad.svg").string()) == 1);
}
