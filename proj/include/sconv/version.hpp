#pragma once

namespace sconv {

inline constexpr const char* version_string = "sconv 0.1.0";

}  // namespace sconv
