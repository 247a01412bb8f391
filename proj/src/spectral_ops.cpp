#include "spde/spectral_ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "spde/fft.hpp"

namespace spde {

double mode_rate(int k) {
    const double pi = std::numbers::pi;
    return 4.0 * pi * pi * static_cast<double>(k) * static_cast<double>(k);
}

SpectralField project(const SpectralField& field, int n_target) {
    if (n_target < 0) throw std::invalid_argument("project: n_target must be >= 0");
    if (n_target >= field.n_modes) return field;
    SpectralField out(n_target);
    for (int k = 0; k <= n_target; ++k) out.coeffs[static_cast<size_t>(k)] = field.at(k);
    return out;
}

SpectralField apply_heat(const SpectralField& field, double t) {
    if (t < 0.0) throw std::invalid_argument("apply_heat: t must be >= 0");
    SpectralField out = field;
    for (int k = 1; k <= out.n_modes; ++k)
        out.coeffs[static_cast<size_t>(k)] *= std::exp(-mode_rate(k) * t);
    return out;
}

double heat_integral_multiplier(int k, double h) {
    if (h <= 0.0) throw std::invalid_argument("heat_integral_multiplier: h must be > 0");
    if (k == 0) return h;
    // (e^{-lambda h} - 1)/(-lambda) = h * expm1(-lambda h)/(-lambda h), stable
    // for both tiny and huge lambda h.
    const double x = -mode_rate(k) * h;
    return h * std::expm1(x) / x;
}

SpectralField apply_heat_integral(const SpectralField& field, double h) {
    if (h <= 0.0) throw std::invalid_argument("apply_heat_integral: h must be > 0");
    SpectralField out = field;
    for (int k = 0; k <= out.n_modes; ++k)
        out.coeffs[static_cast<size_t>(k)] *= heat_integral_multiplier(k, h);
    return out;
}

RealGridField to_physical(const SpectralField& field, int n_points) {
    if (n_points < 2 * field.n_modes + 1)
        throw std::invalid_argument("to_physical: grid too coarse for the band (need 2N+1 points)");
    RealGridField out(n_points);
    std::vector<std::complex<double>> half(static_cast<size_t>(n_points / 2 + 1));
    for (int k = 0; k <= field.n_modes; ++k) half[static_cast<size_t>(k)] = field.at(k);
    fft::inverse_real(half, out.values);
    return out;
}

SpectralField from_physical(const RealGridField& grid, int n_modes) {
    if (grid.n_points < 2 * n_modes + 1)
        throw std::invalid_argument("from_physical: grid too coarse for the band (need 2N+1 points)");
    std::vector<std::complex<double>> half(static_cast<size_t>(grid.n_points / 2 + 1));
    fft::forward_real(grid.values, half);
    SpectralField out(n_modes);
    for (int k = 0; k <= n_modes; ++k) out.coeffs[static_cast<size_t>(k)] = half[static_cast<size_t>(k)];
    out.coeffs[0].imag(0.0);
    return out;
}

namespace {
std::string describe_nonfinite(double x, double input) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "pointwise map produced a non-finite value at x = %.6g (input %.6g)",
                  x, input);
    return buf;
}
} // namespace

nonfinite_value_error::nonfinite_value_error(double x_, double input_)
    : std::runtime_error(describe_nonfinite(x_, input_)), x(x_), input(input_) {}

SpectralField apply_pointwise(const SpectralField& field,
                              const std::function<double(double)>& fn,
                              int oversample, int poly_degree) {
    if (oversample < 2) throw std::invalid_argument("apply_pointwise: oversample must be >= 2");
    const int N = field.n_modes;
    int needed = oversample * (2 * N + 1);
    if (poly_degree > 0) needed = std::max(needed, (poly_degree + 1) * N + 1);
    const int n_x = fft::next_fast_size(needed);

    RealGridField phys = to_physical(field, n_x);
    for (int j = 0; j < n_x; ++j) {
        const double y = fn(phys.values[static_cast<size_t>(j)]);
        if (!std::isfinite(y))
            throw nonfinite_value_error(static_cast<double>(j) / n_x,
                                        phys.values[static_cast<size_t>(j)]);
        phys.values[static_cast<size_t>(j)] = y;
    }
    return from_physical(phys, N);
}

double field_norm(const SpectralField& field, NormKind kind, int eval_resolution) {
    if (kind == NormKind::L2) {
        // Parseval on the unit torus with the integral-normalized transform:
        // ||u||_{L2}^2 = |u_hat(0)|^2 + 2 sum_{k>=1} |u_hat(k)|^2.
        double s = std::norm(field.at(0));
        for (int k = 1; k <= field.n_modes; ++k) s += 2.0 * std::norm(field.at(k));
        return std::sqrt(s);
    }
    int n_x = eval_resolution;
    if (n_x == 0) n_x = kDefaultLinfOversample * (2 * field.n_modes + 1);
    if (n_x < 2 * field.n_modes + 1)
        throw std::invalid_argument("field_norm: Linf evaluation grid too coarse");
    n_x = fft::next_fast_size(n_x);
    RealGridField phys = to_physical(field, n_x);
    double m = 0.0;
    for (double v : phys.values) m = std::max(m, std::abs(v));
    return m;
}

} // namespace spde
