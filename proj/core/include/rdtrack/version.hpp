#pragma once

namespace rdtrack {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rdtrack
