#pragma once

namespace sorq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sorq
