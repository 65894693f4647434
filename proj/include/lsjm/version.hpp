#pragma once

namespace lsjm {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kToolName = "lsjm";

}  // namespace lsjm
