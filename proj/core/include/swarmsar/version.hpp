#pragma once

namespace sar {

inline constexpr const char* kToolName = "swarmsar";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace sar
