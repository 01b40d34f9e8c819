#include "swarmsar/fire_world.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "swarmsar/errors.hpp"
#include "swarmsar/rng.hpp"

namespace sar {

int FireMask::burning_count() const {
    return static_cast<int>(std::count(burning.begin(), burning.end(), std::uint8_t{1}));
}

void FireMask::validate() const {
    if (width < 1 || height < 1)
        throw DomainError("mask dimensions must be >= 1");
    if (resolution_m <= 0.0)
        throw DomainError("mask resolution_m must be > 0");
    if (burning.size() != static_cast<std::size_t>(width) * height)
        throw DomainError("mask cell storage does not match width*height");
}

bool SurveySet::contains(std::int64_t id) const { return find(id) != nullptr; }

const SurveyPoint* SurveySet::find(std::int64_t id) const {
    for (const auto& p : points)
        if (p.id == id) return &p;
    return nullptr;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size())
            throw FormatError(field + ": trailing characters in value '" + value + "'");
        return v;
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception&) {
        throw FormatError(field + ": not a number: '" + value + "'");
    }
}

int parse_int(const std::string& field, const std::string& value) {
    double v = parse_number(field, value);
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw FormatError(field + ": expected integer, got '" + value + "'");
    return i;
}

std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace

FireMask load_mask(const std::filesystem::path& raster_file) {
    std::ifstream in(raster_file);
    if (!in)
        throw FormatError("cannot open mask file: " + raster_file.string());

    std::map<std::string, std::string> header;
    const char* required[] = {"width", "height", "resolution_m", "origin_x_m", "origin_y_m"};

    std::string line;
    while (header.size() < 5) {
        if (!std::getline(in, line))
            throw FormatError("header: unexpected end of file before all header fields were read");
        std::string t = trim(line);
        if (t.empty()) continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw FormatError("header: expected key=value, got '" + t + "'");
        std::string key = trim(t.substr(0, eq));
        if (std::find(std::begin(required), std::end(required), key) == std::end(required))
            throw FormatError("header: unknown field '" + key + "'");
        if (header.count(key))
            throw FormatError("header: duplicate field '" + key + "'");
        header[key] = trim(t.substr(eq + 1));
    }

    FireMask mask;
    mask.width = parse_int("width", header["width"]);
    mask.height = parse_int("height", header["height"]);
    mask.resolution_m = parse_number("resolution_m", header["resolution_m"]);
    mask.origin.x = parse_number("origin_x_m", header["origin_x_m"]);
    mask.origin.y = parse_number("origin_y_m", header["origin_y_m"]);

    if (mask.width < 1) throw FormatError("width: must be >= 1");
    if (mask.height < 1) throw FormatError("height: must be >= 1");
    if (mask.resolution_m <= 0.0) throw FormatError("resolution_m: must be > 0");

    mask.burning.assign(static_cast<std::size_t>(mask.width) * mask.height, 0);

    for (int y = 0; y < mask.height; ++y) {
        std::string row;
        do {
            if (!std::getline(in, row))
                throw FormatError("row " + std::to_string(y) + ": missing (file ended early)");
            row = trim(row);
        } while (row.empty());

        if (static_cast<int>(row.size()) != mask.width)
            throw FormatError("row " + std::to_string(y) + ": length " +
                              std::to_string(row.size()) + " != width " +
                              std::to_string(mask.width));
        for (int x = 0; x < mask.width; ++x) {
            char c = row[static_cast<std::size_t>(x)];
            if (c != '0' && c != '1')
                throw FormatError("row " + std::to_string(y) + ": invalid character '" +
                                  std::string(1, c) + "'");
            mask.set(x, y, c == '1');
        }
    }
    return mask;
}

void save_mask(const FireMask& mask, const std::filesystem::path& raster_file) {
    mask.validate();
    std::ofstream out(raster_file);
    if (!out)
        throw FormatError("cannot write mask file: " + raster_file.string());
    out << "width=" << mask.width << "\n";
    out << "height=" << mask.height << "\n";
    out << "resolution_m=" << shortest(mask.resolution_m) << "\n";
    out << "origin_x_m=" << shortest(mask.origin.x) << "\n";
    out << "origin_y_m=" << shortest(mask.origin.y) << "\n";
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x)
            out << (mask.at(x, y) ? '1' : '0');
        out << "\n";
    }
}

FireMask step_fire(const FireMask& mask, const FireSpreadParams& params, std::uint64_t rng_seed) {
    mask.validate();
    if (params.ignition_probability < 0.0 || params.ignition_probability > 1.0)
        throw DomainError("ignition_probability must be in [0,1]");
    if (params.steps_per_update < 1)
        throw DomainError("steps_per_update must be >= 1");

    static constexpr int four_dx[] = {1, -1, 0, 0};
    static constexpr int four_dy[] = {0, 0, 1, -1};
    static constexpr int eight_dx[] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int eight_dy[] = {0, 0, 1, -1, 1, -1, 1, -1};
    const bool eight = params.neighborhood == Neighborhood::EightConnected;
    const int ncount = eight ? 8 : 4;
    const int* dx = eight ? eight_dx : four_dx;
    const int* dy = eight ? eight_dy : four_dy;

    std::mt19937_64 rng(rng_seed);

    FireMask current = mask;
    for (int step = 0; step < params.steps_per_update; ++step) {
        FireMask next = current;
        for (int y = 0; y < current.height; ++y) {
            for (int x = 0; x < current.width; ++x) {
                if (current.at(x, y)) continue;
                bool ignite = false;
                for (int n = 0; n < ncount; ++n) {
                    int nx = x + dx[n];
                    int ny = y + dy[n];
                    if (!current.in_bounds(nx, ny) || !current.at(nx, ny)) continue;
                    // one draw per burning neighbor, no early exit, so the
                    // stream consumed is a pure function of the input mask
                    if (uniform_unit(rng) < params.ignition_probability) ignite = true;
                }
                if (ignite) next.set(x, y, true);
            }
        }
        current = std::move(next);
    }
    return current;
}

std::vector<CellIndex> extract_boundary(const FireMask& mask) {
    mask.validate();
    static constexpr int dx[] = {1, -1, 0, 0};
    static constexpr int dy[] = {0, 0, 1, -1};
    std::vector<CellIndex> boundary;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            for (int n = 0; n < 4; ++n) {
                int nx = x + dx[n];
                int ny = y + dy[n];
                if (!mask.in_bounds(nx, ny) || !mask.at(nx, ny)) {
                    boundary.push_back({x, y});
                    break;
                }
            }
        }
    }
    return boundary;
}

SurveySet generate_survey_points(const FireMask& mask, double cell_size_m, int update_index) {
    mask.validate();
    if (cell_size_m <= 0.0)
        throw DomainError("cell_size_m must be > 0");

    // Mark grid cells containing the center of at least one burning raster cell;
    // center-based mapping puts every raster cell in exactly one grid cell.
    std::map<std::int64_t, CellIndex> occupied;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y)) continue;
            int gx = static_cast<int>((x + 0.5) * mask.resolution_m / cell_size_m);
            int gy = static_cast<int>((y + 0.5) * mask.resolution_m / cell_size_m);
            std::int64_t id = static_cast<std::int64_t>(gy) * kSurveyGridStride + gx;
            occupied.emplace(id, CellIndex{gx, gy});
        }
    }

    SurveySet survey;
    survey.update_index = update_index;
    survey.cell_size_m = cell_size_m;
    survey.points.reserve(occupied.size());
    for (const auto& [id, cell] : occupied) {
        SurveyPoint p;
        p.id = id;
        p.position = {mask.origin.x + (cell.x + 0.5) * cell_size_m,
                      mask.origin.y + (cell.y + 0.5) * cell_size_m};
        survey.points.push_back(p);
    }
    return survey;
}

FireMask make_disk_mask(int width, int height, double resolution_m, Vec2 origin, Vec2 center,
                        double radius_m) {
    FireMask mask;
    mask.width = width;
    mask.height = height;
    mask.resolution_m = resolution_m;
    mask.origin = origin;
    mask.burning.assign(static_cast<std::size_t>(width) * height, 0);
    mask.validate();
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            Vec2 cell_center{origin.x + (x + 0.5) * resolution_m,
                             origin.y + (y + 0.5) * resolution_m};
            if (distance(cell_center, center) <= radius_m) mask.set(x, y, true);
        }
    }
    return mask;
}

} // namespace sar
