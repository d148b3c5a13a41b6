#pragma once

namespace litesr {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kContainerVersion = 1;

}  // namespace litesr
