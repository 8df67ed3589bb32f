#pragma once

namespace robin {

inline constexpr const char* kToolName = "robintool";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace robin
