#pragma once

namespace nsqstab {

inline constexpr const char* kVersion = "0.1.0";

} // namespace nsqstab
