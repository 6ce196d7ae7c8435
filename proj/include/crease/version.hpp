#pragma once

namespace crease {
inline constexpr const char* kCodeVersion = "0.1.0";
}
