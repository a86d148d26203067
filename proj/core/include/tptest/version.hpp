#pragma once

namespace tptest {

inline constexpr const char* kVersion = "0.1.0";

// Bumped whenever the layout of any emitted CSV/JSON payload changes.
inline constexpr int kSchemaVersion = 1;

}  // namespace tptest
