#pragma once

#include <cstdint>

namespace percospec {

/// Vertex and item indices. Signed so Eigen index arithmetic stays warning-free.
using Index = std::int64_t;

}  // namespace percospec
