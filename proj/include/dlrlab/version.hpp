#pragma once

namespace dlrlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dlrlab
