#pragma once

namespace sphere2b {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sphere2b
