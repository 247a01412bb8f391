#include "spde/rng.hpp"

#include <cmath>
#include <numbers>

namespace spde::rng {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}

inline double uniform_from(std::uint32_t hi, std::uint32_t lo) {
    // 53 uniform bits in (0, 1]; never 0, safe under log().
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(hi) << 21) ^ (static_cast<std::uint64_t>(lo) >> 11);
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

} // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::array<std::uint32_t, 4> philox4x32(const std::array<std::uint32_t, 4>& counter,
                                        std::uint64_t key) {
    std::array<std::uint32_t, 4> c = counter;
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        philox_round(c, k0, k1);
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return c;
}

std::array<double, 2> normal_pair(const RngStream& stream,
                                  std::uint32_t lane0, std::uint32_t lane1,
                                  std::uint32_t lane2) {
    const std::uint64_t key = splitmix64(stream.base_seed ^ splitmix64(stream.stream_id));
    const std::array<std::uint32_t, 4> ctr = {lane0, lane1, lane2, 0x53504445u};
    const auto r = philox4x32(ctr, key);
    const double u1 = uniform_from(r[0], r[1]);
    const double u2 = uniform_from(r[2], r[3]);
    const double rho = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    return {rho * std::cos(ang), rho * std::sin(ang)};
}

} // namespace spde::rng
