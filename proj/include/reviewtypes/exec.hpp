#pragma once

namespace rvt {

// Execution policy for the heavy kernels. Both paths derive per-iteration
// RNG streams from the same root seed, so results are bitwise identical.
enum class Execution { serial, parallel };

} // namespace rvt
