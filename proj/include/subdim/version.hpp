#pragma once

namespace subdim {

/// Library semantic version, echoed in every CLI report.
inline constexpr const char* kVersion = "1.0.0";

}  // namespace subdim
