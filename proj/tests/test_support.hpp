#pragma once

#include <cmath>

#include "spde/rng.hpp"
#include "spde/spectral_field.hpp"

namespace spde::testing {

/// Deterministic random trigonometric polynomial with O(1) coefficients.
inline SpectralField random_field(int n_modes, std::uint64_t seed) {
    SpectralField f(n_modes);
    const RngStream stream{seed, 0xF1E1Dull};
    for (int k = 0; k <= n_modes; ++k) {
        const auto z = rng::normal_pair(stream, static_cast<std::uint32_t>(k), 0);
        const double scale = 1.0 / (1.0 + 0.25 * k);
        f.coeffs[static_cast<size_t>(k)] = {scale * z[0], k == 0 ? 0.0 : scale * z[1]};
    }
    return f;
}

inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max({1e-300, std::abs(a), std::abs(b)});
}

inline double max_coeff_diff(const SpectralField& a, const SpectralField& b) {
    double worst = 0.0;
    const int n = std::max(a.n_modes, b.n_modes);
    for (int k = 0; k <= n; ++k) worst = std::max(worst, std::abs(a.at(k) - b.at(k)));
    return worst;
}

} // namespace spde::testing
