#pragma once

namespace preheat {

inline constexpr const char* version = "0.1.0";

} // namespace preheat
