#pragma once

namespace skewt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace skewt
