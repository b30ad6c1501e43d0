#pragma once

namespace ssslab {

inline constexpr const char* version_string = "ssslab 0.1.0";

} // namespace ssslab
