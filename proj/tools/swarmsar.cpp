#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "swarmsar/errors.hpp"
#include "swarmsar/scenario.hpp"
#include "swarmsar/sim_engine.hpp"
#include "swarmsar/svg_render.hpp"
#include "swarmsar/version.hpp"

namespace fs = std::filesystem;

namespace {

std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw sar::FormatError("cannot open file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            throw sar::Error("cannot write file: " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

sar::KeyValues overrides_to_key_values(const std::vector<std::string>& sets,
                                       const std::string& planner, std::int64_t seed,
                                       bool seed_given) {
    sar::KeyValues extra;
    for (const auto& kv : sets) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw sar::ConfigError("--set expects key=value, got '" + kv + "'");
        extra.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!planner.empty()) extra.emplace_back("planner.kind", planner);
    if (seed_given) extra.emplace_back("sim.seed", std::to_string(seed));
    return extra;
}

/// Scenario keys from either a config file or a previously written manifest.
sar::KeyValues load_scenario_source(const std::string& scenario_path,
                                    const std::string& manifest_path) {
    if (!manifest_path.empty()) {
        nlohmann::json manifest = nlohmann::json::parse(read_file(manifest_path));
        sar::KeyValues kvs;
        for (const auto& [key, value] : manifest.at("config").items())
            kvs.emplace_back(key, value.get<std::string>());
        return kvs;
    }
    return sar::load_key_values(scenario_path);
}

int run_one(const sar::ScenarioConfig& config, const fs::path& out_dir,
            const std::string& scenario_source) {
    fs::path parent = fs::absolute(out_dir).parent_path();
    if (!fs::exists(parent))
        throw sar::Error("output directory parent does not exist: " + parent.string());
    fs::create_directories(out_dir);

    nlohmann::ordered_json manifest;
    manifest["tool"] = sar::kToolName;
    manifest["version"] = sar::kToolVersion;
    manifest["seed"] = config.seed;
    manifest["started_utc"] = utc_timestamp();
    manifest["scenario_source"] = scenario_source;
    nlohmann::ordered_json config_keys = nlohmann::ordered_json::object();
    for (const auto& [key, value] : sar::scenario_to_keys(config)) config_keys[key] = value;
    manifest["config"] = std::move(config_keys);
    manifest["outputs"] = {{"metrics", "metrics.jsonl"}, {"frames", "frames.jsonl"}};
    write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");

    std::string frames;
    sar::MetricsReport report =
        sar::run_scenario(config, [&frames](const std::string& line) {
            frames += line;
            frames += "\n";
        });

    write_file_atomic(out_dir / "frames.jsonl", frames);
    write_file_atomic(out_dir / "metrics.jsonl", sar::metrics_to_jsonl(report));
    return report.mission_complete ? 0 : 2;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
    std::vector<int> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        std::size_t dots = item.find("..");
        try {
            if (dots != std::string::npos) {
                int from = std::stoi(item.substr(0, dots));
                int to = std::stoi(item.substr(dots + 2));
                for (int v = from; v <= to; ++v) values.push_back(v);
            } else if (!item.empty()) {
                values.push_back(std::stoi(item));
            }
        } catch (const std::exception&) {
            throw sar::ConfigError(what + ": expected integers or a..b ranges, got '" + item +
                                   "'");
        }
    }
    if (values.empty())
        throw sar::ConfigError(what + ": empty list");
    return values;
}

struct SweepRow {
    int fleet{0};
    int seed{0};
    bool ok{false};
    bool complete{false};
    double mean_coverage{0.0};
    std::optional<double> mean_completion_s;
    std::string error;
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge-coordinated UAV swarm mission simulator and planner"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(sar::kToolVersion));

    // validate-config
    std::string vc_file;
    auto* validate_cmd = app.add_subcommand("validate-config", "Resolve and check a scenario file");
    validate_cmd->add_option("file", vc_file, "scenario config file")->required();

    // run
    std::string run_scenario_path, run_manifest_path, run_out, run_planner;
    std::vector<std::string> run_sets;
    std::int64_t run_seed = 0;
    bool run_seed_given = false;
    auto* run_cmd = app.add_subcommand("run", "Run one mission scenario");
    auto* scenario_opt = run_cmd->add_option("--scenario", run_scenario_path, "scenario config file");
    auto* manifest_opt =
        run_cmd->add_option("--manifest", run_manifest_path, "re-run from a manifest");
    scenario_opt->excludes(manifest_opt);
    run_cmd->add_option("--out", run_out, "output directory")->required();
    run_cmd->add_option("--set", run_sets, "override config key=value (repeatable)");
    run_cmd->add_option("--seed", run_seed, "override sim.seed")
        ->each([&run_seed_given](const std::string&) { run_seed_given = true; });
    run_cmd->add_option("--planner", run_planner, "override planner.kind")
        ->check(CLI::IsMember({"greedy", "cluster", "remote"}));

    // sweep
    std::string sweep_scenario, sweep_fleets, sweep_seeds, sweep_out;
    std::vector<std::string> sweep_sets;
    auto* sweep_cmd = app.add_subcommand("sweep", "Batch runs over fleet sizes and seeds");
    sweep_cmd->add_option("--scenario", sweep_scenario, "scenario config file")->required();
    sweep_cmd->add_option("--fleets", sweep_fleets, "fleet sizes, e.g. 8,12")->required();
    sweep_cmd->add_option("--seeds", sweep_seeds, "seeds, e.g. 1..5 or 1,2,3")->required();
    sweep_cmd->add_option("--out", sweep_out, "output directory")->required();
    sweep_cmd->add_option("--set", sweep_sets, "override config key=value (repeatable)");

    // render
    std::string render_frames, render_svg;
    auto* render_cmd = app.add_subcommand("render", "Render a frames file to SVG");
    render_cmd->add_option("--frames", render_frames, "frames.jsonl input")->required();
    render_cmd->add_option("--svg", render_svg, "output SVG file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_cmd->parsed()) {
            sar::ResolvedScenario resolved = sar::resolve_scenario(sar::load_key_values(vc_file));
            if (!resolved.issues.empty()) {
                for (const auto& issue : resolved.issues) std::cerr << "error: " << issue << "\n";
                return 1;
            }
            for (const auto& [key, value] : sar::scenario_to_keys(resolved.config))
                std::cout << key << " = " << value << "\n";
            return 0;
        }

        if (run_cmd->parsed()) {
            if (run_scenario_path.empty() && run_manifest_path.empty()) {
                std::cerr << "error: one of --scenario or --manifest is required\n";
                return 1;
            }
            sar::KeyValues kvs = load_scenario_source(run_scenario_path, run_manifest_path);
            for (auto& kv : overrides_to_key_values(run_sets, run_planner, run_seed,
                                                    run_seed_given))
                kvs.push_back(std::move(kv));
            sar::ResolvedScenario resolved = sar::resolve_scenario(kvs);
            if (!resolved.issues.empty()) {
                for (const auto& issue : resolved.issues) std::cerr << "error: " << issue << "\n";
                return 1;
            }
            std::string source =
                run_manifest_path.empty() ? run_scenario_path : run_manifest_path;
            return run_one(resolved.config, run_out, source);
        }

        if (sweep_cmd->parsed()) {
            std::vector<int> fleets = parse_int_list(sweep_fleets, "--fleets");
            std::vector<int> seeds = parse_int_list(sweep_seeds, "--seeds");

            fs::path out_dir(sweep_out);
            fs::path parent = fs::absolute(out_dir).parent_path();
            if (!fs::exists(parent))
                throw sar::Error("output directory parent does not exist: " + parent.string());
            fs::create_directories(out_dir);

            std::vector<SweepRow> rows;
            for (int fleet : fleets) {
                for (int seed : seeds) {
                    SweepRow row;
                    row.fleet = fleet;
                    row.seed = seed;
                    try {
                        sar::KeyValues kvs = sar::load_key_values(sweep_scenario);
                        for (auto& kv :
                             overrides_to_key_values(sweep_sets, "", 0, false))
                            kvs.push_back(std::move(kv));
                        kvs.emplace_back("uav.count", std::to_string(fleet));
                        kvs.emplace_back("sim.seed", std::to_string(seed));
                        sar::ScenarioConfig config = sar::resolve_scenario_or_throw(kvs);

                        fs::path run_dir = out_dir / ("fleet" + std::to_string(fleet) + "_seed" +
                                                      std::to_string(seed));
                        int code = run_one(config, run_dir, sweep_scenario);
                        row.ok = true;
                        row.complete = code == 0;

                        std::string metrics = read_file(run_dir / "metrics.jsonl");
                        std::stringstream lines(metrics);
                        std::string line;
                        double coverage_sum = 0.0;
                        int coverage_n = 0;
                        double completion_sum = 0.0;
                        int completion_n = 0;
                        while (std::getline(lines, line)) {
                            nlohmann::json record = nlohmann::json::parse(line);
                            if (record["type"] != "update") continue;
                            coverage_sum += record["coverage_rate"].get<double>();
                            ++coverage_n;
                            if (!record["mission_completion_time_s"].is_null()) {
                                completion_sum +=
                                    record["mission_completion_time_s"].get<double>();
                                ++completion_n;
                            }
                        }
                        row.mean_coverage = coverage_n ? coverage_sum / coverage_n : 0.0;
                        if (completion_n)
                            row.mean_completion_s = completion_sum / completion_n;
                    } catch (const std::exception& e) {
                        row.ok = false;
                        row.error = e.what();
                    }
                    rows.push_back(std::move(row));
                }
            }

            std::string summary;
            for (const auto& row : rows) {
                nlohmann::ordered_json record;
                record["type"] = "run";
                record["fleet"] = row.fleet;
                record["seed"] = row.seed;
                record["ok"] = row.ok;
                if (row.ok) {
                    record["complete"] = row.complete;
                    record["mean_coverage"] = row.mean_coverage;
                    if (row.mean_completion_s)
                        record["mean_completion_time_s"] = *row.mean_completion_s;
                    else
                        record["mean_completion_time_s"] = nullptr;
                } else {
                    record["error"] = row.error;
                }
                summary += record.dump() + "\n";
            }

            std::printf("%-8s %-6s %-14s %-20s %s\n", "fleet", "runs", "mean_coverage",
                        "mean_completion_s", "failures");
            for (int fleet : fleets) {
                double coverage_sum = 0.0;
                double completion_sum = 0.0;
                int ok_n = 0, completion_n = 0, failed = 0;
                for (const auto& row : rows) {
                    if (row.fleet != fleet) continue;
                    if (!row.ok) {
                        ++failed;
                        continue;
                    }
                    coverage_sum += row.mean_coverage;
                    ++ok_n;
                    if (row.mean_completion_s) {
                        completion_sum += *row.mean_completion_s;
                        ++completion_n;
                    }
                }
                nlohmann::ordered_json record;
                record["type"] = "fleet_summary";
                record["fleet"] = fleet;
                record["runs"] = ok_n;
                record["failures"] = failed;
                record["mean_coverage"] = ok_n ? coverage_sum / ok_n : 0.0;
                if (completion_n)
                    record["mean_completion_time_s"] = completion_sum / completion_n;
                else
                    record["mean_completion_time_s"] = nullptr;
                summary += record.dump() + "\n";
                std::printf("%-8d %-6d %-14.4f %-20.1f %d\n", fleet, ok_n,
                            ok_n ? coverage_sum / ok_n : 0.0,
                            completion_n ? completion_sum / completion_n : 0.0, failed);
            }
            write_file_atomic(out_dir / "summary.jsonl", summary);

            bool any_failed = std::any_of(rows.begin(), rows.end(),
                                          [](const SweepRow& r) { return !r.ok; });
            return any_failed ? 1 : 0;
        }

        if (render_cmd->parsed()) {
            std::string svg = sar::render_frames_to_svg(read_file(render_frames));
            write_file_atomic(render_svg, svg);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
