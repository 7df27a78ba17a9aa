#pragma once

namespace chb {
inline constexpr const char* kVersion = "0.1.0";
}
