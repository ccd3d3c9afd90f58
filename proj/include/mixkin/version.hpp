#pragma once

namespace mixkin {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mixkin
