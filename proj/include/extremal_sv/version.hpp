#pragma once

namespace extremal_sv {

inline constexpr const char* version_string = "0.1.0";

}  // namespace extremal_sv
