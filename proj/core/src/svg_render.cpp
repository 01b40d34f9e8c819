#include "swarmsar/svg_render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "swarmsar/errors.hpp"
#include "swarmsar/geometry.hpp"

namespace sar {

namespace {

const char* kPalette[] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
};

std::string uav_color(int index) {
    return kPalette[static_cast<std::size_t>(index) % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", v);
    return buf;
}

struct Bounds {
    double min_x{1e300}, min_y{1e300}, max_x{-1e300}, max_y{-1e300};
    void include(double x, double y) {
        min_x = std::min(min_x, x);
        min_y = std::min(min_y, y);
        max_x = std::max(max_x, x);
        max_y = std::max(max_y, y);
    }
    bool empty() const { return min_x > max_x; }
};

} // namespace

std::string render_frames_to_svg(const std::string& frames_jsonl) {
    std::stringstream stream(frames_jsonl);
    std::string line;
    int line_no = 0;

    nlohmann::json plan; // latest plan record wins
    std::vector<nlohmann::json> frames;

    while (std::getline(stream, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json record;
        try {
            record = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!record.is_object() || !record.contains("type"))
            throw FormatError("line " + std::to_string(line_no) + ": record has no type field");
        const std::string type = record["type"].get<std::string>();
        if (type == "plan")
            plan = std::move(record);
        else if (type == "frame")
            frames.push_back(std::move(record));
    }

    if (plan.is_null() && frames.empty())
        throw FormatError("frames input contains no plan or frame records");
    if (plan.is_null())
        throw FormatError("frames input contains no plan record");

    const double cell = plan.value("cell_size_m", 450.0);
    const double boundary_cell = plan.value("boundary_cell_m", cell);

    Bounds bounds;
    std::map<std::int64_t, Vec2> point_positions;
    for (const auto& p : plan["points"]) {
        double x = p["x_m"].get<double>();
        double y = p["y_m"].get<double>();
        point_positions[p["id"].get<std::int64_t>()] = {x, y};
        bounds.include(x, y);
    }
    for (const auto& b : plan["boundary"])
        bounds.include(b["x_m"].get<double>(), b["y_m"].get<double>());
    double egs_x = plan["egs"]["x_m"].get<double>();
    double egs_y = plan["egs"]["y_m"].get<double>();
    bounds.include(egs_x, egs_y);
    for (const auto& f : frames)
        for (const auto& u : f["uavs"]) bounds.include(u["x_m"].get<double>(), u["y_m"].get<double>());
    if (bounds.empty())
        throw FormatError("frames input contains nothing to draw");

    const double margin = std::max({bounds.max_x - bounds.min_x, bounds.max_y - bounds.min_y,
                                    cell}) * 0.05;
    bounds.min_x -= margin;
    bounds.min_y -= margin;
    bounds.max_x += margin;
    bounds.max_y += margin;

    const double world_w = bounds.max_x - bounds.min_x;
    const double world_h = bounds.max_y - bounds.min_y;
    const double width_px = 1000.0;
    const double scale = width_px / world_w;
    const double height_px = world_h * scale;

    auto sx = [&](double x) { return (x - bounds.min_x) * scale; };
    auto sy = [&](double y) { return (bounds.max_y - y) * scale; }; // y up in world, down in svg

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width_px) + "\" height=\"" +
           fmt(height_px) + "\" viewBox=\"0 0 " + fmt(width_px) + " " + fmt(height_px) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

    // fire boundary cells
    svg += "<g class=\"boundary\" fill=\"none\" stroke=\"#cc3300\" stroke-width=\"1\">\n";
    const double half = boundary_cell / 2.0;
    for (const auto& b : plan["boundary"]) {
        double x = b["x_m"].get<double>();
        double y = b["y_m"].get<double>();
        svg += "<rect x=\"" + fmt(sx(x - half)) + "\" y=\"" + fmt(sy(y + half)) + "\" width=\"" +
               fmt(boundary_cell * scale) + "\" height=\"" + fmt(boundary_cell * scale) + "\"/>\n";
    }
    svg += "</g>\n";

    // survey points grouped per owning UAV (unowned points drawn grey)
    std::map<int, std::vector<std::int64_t>> by_owner;
    for (const auto& p : plan["points"])
        by_owner[p["uav"].get<int>()].push_back(p["id"].get<std::int64_t>());
    for (const auto& [owner, ids] : by_owner) {
        std::string color = owner < 0 ? "#bbbbbb" : uav_color(owner);
        svg += "<g class=\"uav-points\" data-uav=\"" + std::to_string(owner) + "\" fill=\"" +
               color + "\">\n";
        for (std::int64_t id : ids) {
            Vec2 pos = point_positions.at(id);
            svg += "<circle cx=\"" + fmt(sx(pos.x)) + "\" cy=\"" + fmt(sy(pos.y)) +
                   "\" r=\"4\"/>\n";
        }
        svg += "</g>\n";
    }

    // planned routes
    for (const auto& r : plan["routes"]) {
        int uav = r["uav"].get<int>();
        std::string pts = fmt(sx(r["start_x_m"].get<double>())) + "," +
                          fmt(sy(r["start_y_m"].get<double>()));
        for (const auto& wp : r["waypoints"]) {
            auto it = point_positions.find(wp.get<std::int64_t>());
            if (it == point_positions.end())
                throw FormatError("plan record: route waypoint " +
                                  std::to_string(wp.get<std::int64_t>()) +
                                  " missing from points list");
            pts += " " + fmt(sx(it->second.x)) + "," + fmt(sy(it->second.y));
        }
        svg += "<polyline class=\"route\" data-uav=\"" + std::to_string(uav) + "\" fill=\"none\" "
               "stroke=\"" + uav_color(uav) + "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    }

    // flight trails from the frame stream
    std::map<int, std::string> trails;
    for (const auto& f : frames) {
        for (const auto& u : f["uavs"]) {
            int index = u["index"].get<int>();
            std::string& trail = trails[index];
            if (!trail.empty()) trail += " ";
            trail += fmt(sx(u["x_m"].get<double>())) + "," + fmt(sy(u["y_m"].get<double>()));
        }
    }
    for (const auto& [index, pts] : trails) {
        svg += "<polyline class=\"trail\" data-uav=\"" + std::to_string(index) + "\" fill=\"none\" "
               "stroke=\"" + uav_color(index) + "\" stroke-width=\"1\" stroke-opacity=\"0.5\" "
               "stroke-dasharray=\"3,3\" points=\"" + pts + "\"/>\n";
    }

    // final UAV positions
    if (!frames.empty()) {
        for (const auto& u : frames.back()["uavs"]) {
            int index = u["index"].get<int>();
            double x = sx(u["x_m"].get<double>());
            double y = sy(u["y_m"].get<double>());
            svg += "<circle class=\"uav\" data-uav=\"" + std::to_string(index) + "\" cx=\"" +
                   fmt(x) + "\" cy=\"" + fmt(y) + "\" r=\"6\" fill=\"" + uav_color(index) +
                   "\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
        }
    }

    // EGS marker
    svg += "<rect class=\"egs\" x=\"" + fmt(sx(egs_x) - 7) + "\" y=\"" + fmt(sy(egs_y) - 7) +
           "\" width=\"14\" height=\"14\" fill=\"#000000\"/>\n";
    svg += "<text x=\"" + fmt(sx(egs_x) + 10) + "\" y=\"" + fmt(sy(egs_y) + 5) +
           "\" font-family=\"sans-serif\" font-size=\"14\">EGS</text>\n";

    svg += "</svg>\n";
    return svg;
}

} // namespace sar
