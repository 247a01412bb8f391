#pragma once

#include <array>
#include <cstdint>

namespace spde {

/// Identifies one reproducible random stream: sample index on top of the
/// experiment seed.  Equal pairs reproduce equal output bit-for-bit no matter
/// the thread count or evaluation order.
struct RngStream {
    std::uint64_t base_seed = 0;
    std::uint64_t stream_id = 0;
};

namespace rng {

/// Philox4x32-10 block: four 32-bit words from a 128-bit counter and 64-bit key.
std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        std::uint64_t key);

std::uint64_t splitmix64(std::uint64_t x);

/// Two independent standard normals keyed by (stream, lane0, lane1, lane2).
/// Lanes are free-form labels; the samplers use (mode, step, draw).
std::array<double, 2> normal_pair(const RngStream& stream,
                                  std::uint32_t lane0, std::uint32_t lane1,
                                  std::uint32_t lane2 = 0);

} // namespace rng
} // namespace spde
