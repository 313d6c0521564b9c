#pragma once

namespace pweight {
inline constexpr const char* kVersion = "0.1.0";
}
