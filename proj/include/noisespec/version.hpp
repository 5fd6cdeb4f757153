#pragma once

namespace noisespec {

inline constexpr const char* kVersion = "0.1.0";

} // namespace noisespec
