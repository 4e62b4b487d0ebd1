#pragma once

namespace airfl {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace airfl
