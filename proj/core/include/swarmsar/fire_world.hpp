#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "swarmsar/geometry.hpp"

namespace sar {

enum class Neighborhood { FourConnected, EightConnected };

/// Parameters of the synthetic cellular-automaton fire spread.
struct FireSpreadParams {
    double ignition_probability{0.3}; // per burning neighbor, per step
    Neighborhood neighborhood{Neighborhood::FourConnected};
    int steps_per_update{1};
};

/// Boolean raster of burning cells. Row-major storage, row 0 is the
/// southernmost row; `origin` is the lower-left corner of cell (0,0) in meters.
struct FireMask {
    int width{0};
    int height{0};
    double resolution_m{0.0};
    Vec2 origin{};
    std::vector<std::uint8_t> burning;

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
    bool at(int x, int y) const { return burning[index(x, y)] != 0; }
    void set(int x, int y, bool value) { burning[index(x, y)] = value ? 1 : 0; }
    int burning_count() const;

    /// Throws DomainError if dimensions, resolution, or storage size are inconsistent.
    void validate() const;
};

struct CellIndex {
    int x{0};
    int y{0};
    friend bool operator==(CellIndex a, CellIndex b) { return a.x == b.x && a.y == b.y; }
    friend bool operator<(CellIndex a, CellIndex b) {
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    }
};

/// One survey target at the centroid of a grid cell intersecting the fire.
struct SurveyPoint {
    std::int64_t id{0};
    Vec2 position{};
};

/// Fixed row stride of the survey-grid id encoding: id = row * stride + col.
/// Ids depend only on the grid-cell coordinates (and the mask origin), so a
/// cell keeps its id across boundary updates even if the raster grows.
inline constexpr std::int64_t kSurveyGridStride = 1 << 20;

/// The survey targets for one boundary-update index. Ids are stable across
/// updates: grid-cell coordinates are the identity key, so growth of the
/// burning region only appends new ids.
struct SurveySet {
    int update_index{0};
    double cell_size_m{450.0};
    std::vector<SurveyPoint> points;

    bool contains(std::int64_t id) const;
    const SurveyPoint* find(std::int64_t id) const;
};

/// Reads the plain-text mask format:
///   width=<int> height=<int> resolution_m=<float> origin_x_m=<float> origin_y_m=<float>
/// (one header line each, any order), followed by `height` rows of `width`
/// characters from {0,1}; the first data row is the southernmost.
/// Throws FormatError naming the offending field on malformed input.
FireMask load_mask(const std::filesystem::path& raster_file);

/// Inverse of load_mask; used by tooling and tests.
void save_mask(const FireMask& mask, const std::filesystem::path& raster_file);

/// Advances the cellular automaton by params.steps_per_update synchronous
/// steps. A non-burning cell ignites with probability `ignition_probability`
/// independently per burning neighbor. Burning cells never extinguish, so the
/// output burning set is a superset of the input. Deterministic given seed.
FireMask step_fire(const FireMask& mask, const FireSpreadParams& params, std::uint64_t rng_seed);

/// Burning cells with at least one non-burning (or off-grid) 4-neighbor,
/// in row-major order.
std::vector<CellIndex> extract_boundary(const FireMask& mask);

/// Lays a uniform grid of `cell_size_m` cells anchored at the mask origin and
/// emits one point at the centroid of every grid cell containing the center of
/// at least one burning raster cell. Ids are the row-major grid-cell index.
SurveySet generate_survey_points(const FireMask& mask, double cell_size_m, int update_index = 0);

/// Synthetic ignition state: burning disk of `radius_m` around `center`.
FireMask make_disk_mask(int width, int height, double resolution_m, Vec2 origin, Vec2 center,
                        double radius_m);

} // namespace sar
