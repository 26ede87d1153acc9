#pragma once

namespace stochquad {

inline constexpr const char* kVersion = "stochquad 0.1.0";

}  // namespace stochquad
