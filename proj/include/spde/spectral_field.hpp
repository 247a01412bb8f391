#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace spde {

/// Real field on the unit torus stored as its Fourier coefficients for
/// modes 0..N; negative modes are implicit by conjugation, so the mode-0
/// coefficient is kept exactly real.  Convention:
///   u(x) = sum_{|k| <= N} u_hat(k) exp(+2 pi i k x),
///   u_hat(k) = integral over the torus of u(x) exp(-2 pi i k x) dx.
struct SpectralField {
    int n_modes = 0;                           // N, maximum retained wavenumber
    std::vector<std::complex<double>> coeffs;  // index k = 0..N

    SpectralField() = default;
    explicit SpectralField(int N) : n_modes(N), coeffs(static_cast<size_t>(N) + 1) {
        if (N < 0) throw std::invalid_argument("SpectralField: N must be >= 0");
    }

    static SpectralField zero(int N) { return SpectralField(N); }

    /// Field c * e_k (plus the conjugate mode when k > 0).
    static SpectralField mode(int k, std::complex<double> c, int N) {
        SpectralField f(N);
        if (k < 0 || k > N) throw std::invalid_argument("SpectralField::mode: k out of band");
        if (k == 0) c.imag(0.0);
        f.coeffs[static_cast<size_t>(k)] = c;
        return f;
    }

    std::complex<double> at(int k) const {
        return k <= n_modes ? coeffs[static_cast<size_t>(k)] : std::complex<double>{};
    }

    bool all_finite() const {
        for (const auto& c : coeffs)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
        return true;
    }
};

inline SpectralField operator+(const SpectralField& a, const SpectralField& b) {
    SpectralField out(std::max(a.n_modes, b.n_modes));
    for (int k = 0; k <= out.n_modes; ++k) out.coeffs[static_cast<size_t>(k)] = a.at(k) + b.at(k);
    return out;
}

inline SpectralField operator-(const SpectralField& a, const SpectralField& b) {
    SpectralField out(std::max(a.n_modes, b.n_modes));
    for (int k = 0; k <= out.n_modes; ++k) out.coeffs[static_cast<size_t>(k)] = a.at(k) - b.at(k);
    return out;
}

inline SpectralField operator*(double s, const SpectralField& a) {
    SpectralField out = a;
    for (auto& c : out.coeffs) c *= s;
    return out;
}

/// Real field sampled at x_j = j / n_points on the torus.
struct RealGridField {
    int n_points = 0;
    std::vector<double> values;

    RealGridField() = default;
    explicit RealGridField(int n) : n_points(n), values(static_cast<size_t>(n)) {
        if (n < 2) throw std::invalid_argument("RealGridField: need at least 2 points");
    }
};

/// Equidistant grid t_k = k T / M on [0, T].
struct TimeGrid {
    double horizon = 1.0;  // T
    int steps = 1;         // M

    TimeGrid() = default;
    TimeGrid(double T, int M) : horizon(T), steps(M) {
        if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
        if (M < 1) throw std::invalid_argument("TimeGrid: need at least one step");
    }

    double dt() const { return horizon / steps; }
    double point(int k) const { return k * horizon / steps; }

    bool operator==(const TimeGrid& o) const {
        return horizon == o.horizon && steps == o.steps;
    }
};

} // namespace spde
