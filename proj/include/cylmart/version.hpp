#pragma once

namespace cylmart {

inline constexpr const char* kLibraryVersion = "cylmart 0.1.0";

}  // namespace cylmart
