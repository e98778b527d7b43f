#pragma once

namespace loadcast {

inline constexpr const char* kVersion = "0.1.0";

}
