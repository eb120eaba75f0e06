#pragma once

namespace rcv {
inline constexpr const char* kVersion = "0.1.0";
}
