#pragma once

namespace impedance {
inline constexpr const char* kVersion = "0.1.0";
}
