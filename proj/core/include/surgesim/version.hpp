#pragma once

namespace surge {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace surge
