#pragma once

#include <functional>

#include "spde/spectral_field.hpp"

namespace spde {

/// lambda_k = 4 pi^2 k^2, the heat decay rate of mode k.
double mode_rate(int k);

/// Orthogonal projection onto modes |k| <= n_target.
SpectralField project(const SpectralField& field, int n_target);

/// Heat propagator: mode k is scaled by exp(-4 pi^2 k^2 t).  Requires t >= 0.
SpectralField apply_heat(const SpectralField& field, double t);

/// Multiplier of mode k under apply_heat_integral.
double heat_integral_multiplier(int k, double h);

/// Integrated heat propagator int_0^h P_s ds: mode k != 0 is scaled by
/// (exp(-4 pi^2 k^2 h) - 1) / (-4 pi^2 k^2); mode 0 by h.  Requires h > 0.
SpectralField apply_heat_integral(const SpectralField& field, double h);

/// Evaluate on the physical grid x_j = j / n_points.  Requires
/// n_points >= 2 N + 1 so no information is lost.
RealGridField to_physical(const SpectralField& field, int n_points);

/// Forward transform truncated to |k| <= n_modes.  Requires
/// grid.n_points >= 2 n_modes + 1.
SpectralField from_physical(const RealGridField& grid, int n_modes);

/// Raised if a pointwise map produces a non-finite value (nonlinearity
/// blow-up); carries the offending grid location.
struct nonfinite_value_error : std::runtime_error {
    double x;      // torus coordinate of the bad point
    double input;  // field value fed to the map
    nonfinite_value_error(double x_, double input_);
};

/// Dealiased pointwise application: evaluate `fn` on an oversampled physical
/// grid, transform back, truncate to the field's band.  The grid has at least
/// oversample * (2N + 1) points (rounded up to a transform-friendly size), and
/// at least (poly_degree + 1) N + 1 when fn is polynomial of known degree, in
/// which case the result is the exact band projection of fn(u).
SpectralField apply_pointwise(const SpectralField& field,
                              const std::function<double(double)>& fn,
                              int oversample = 4, int poly_degree = 0);

enum class NormKind { L2, Linf };

inline constexpr int kDefaultLinfOversample = 8;

/// L2: Parseval sum over modes.  Linf: max |u| on an oversampled physical
/// grid of eval_resolution points (>= 2N+1; 0 picks 8(2N+1)); this is a lower
/// bound on the true sup-norm.
double field_norm(const SpectralField& field, NormKind kind, int eval_resolution = 0);

} // namespace spde
