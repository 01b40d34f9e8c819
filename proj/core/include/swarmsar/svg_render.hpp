#pragma once

#include <string>

namespace sar {

/// Renders a frames file (plan + frame records, one JSON object per line)
/// into a self-contained SVG: survey points colored per owning UAV, route
/// polylines, fire-boundary cell outlines, the EGS marker, UAV trails and
/// final positions. Uses the latest plan record.
/// Throws FormatError naming the line on malformed records or when the
/// input holds no usable records.
std::string render_frames_to_svg(const std::string& frames_jsonl);

} // namespace sar
