#pragma once

#include "ssm/types.hpp"

#include <cstdint>

namespace ssm {

/// `count` independent N(0,1) draws from the stream identified by (seed, stream).
/// Each stream is seeded independently, so results do not depend on thread scheduling.
[[nodiscard]] Vector standard_normals(std::uint64_t seed, std::uint64_t stream, Eigen::Index count);

/// Uniform(0,1) draws from the stream identified by (seed, stream).
[[nodiscard]] Vector uniforms(std::uint64_t seed, std::uint64_t stream, Eigen::Index count);

} // namespace ssm
