#pragma once

#include <iosfwd>
#include <vector>

#include "spde/rng.hpp"
#include "spde/spectral_field.hpp"

namespace spde {

/// Samples of the band-limited stochastic convolution on a time grid: one
/// SpectralField per grid point, samples[0] identically zero.  Per mode n the
/// sequence is an exact Ornstein-Uhlenbeck chain with rate 4 pi^2 n^2.
struct OuPath {
    TimeGrid grid;
    int n_modes = 0;
    std::vector<SpectralField> samples;  // size grid.steps + 1
    RngStream stream;
};

/// Spectral cylindrical Wiener process on a time grid: per-mode complex
/// Brownian motion with E|W_t(n)|^2 = t, mode 0 real.
struct WienerPath {
    TimeGrid grid;
    int n_modes = 0;
    std::vector<SpectralField> samples;
    RngStream stream;
};

/// Variance of the OU transition innovation over a step of length h at decay
/// rate `rate` (= 4 pi^2 n^2): (1 - e^{-2 rate h}) / (2 rate), with the
/// rate -> 0 limit h.
double ou_transition_variance(double rate, double h);

/// Marginal variance of the stochastic convolution mode at time t,
/// int_0^t e^{-2 rate s} ds.
double ou_marginal_variance(double rate, double t);

/// Exact draw of the truncated stochastic convolution restricted to the grid.
OuPath sample_ou_path(const TimeGrid& grid, int n_modes, const RngStream& stream);

/// Spectral Wiener path (the rate-1/4 baseline's noise input).
WienerPath sample_wiener_path(const TimeGrid& grid, int n_modes, const RngStream& stream);

/// Restriction to every factor-th grid point; the restriction of an exact
/// path is exact on the coarse grid.  `factor` must divide grid.steps.
OuPath subsample(const OuPath& path, int factor);
WienerPath subsample(const WienerPath& path, int factor);

/// Drop modes above n_target (noise coupling across spatial resolutions).
OuPath project_modes(const OuPath& path, int n_target);

/// Joint exact draw of (solution, convolution) for the linear equation
/// f(u) = c u with u_0 = 0: per mode the pair is a 2-d Gaussian chain with
/// propagators (e^{(c - rate) h}, e^{-rate h}) and closed-form innovation
/// covariance.  The first member holds the exact solution states; used as a
/// reference without any discretization bias.
struct JointLinearPath {
    TimeGrid grid;
    int n_modes = 0;
    std::vector<SpectralField> exact_states;
    OuPath ou;
};

/// Innovation covariance entries for the joint linear chain (exposed so tests
/// can pin them against quadrature of the defining integrals).
struct JointStepCovariance {
    double var_solution;    // Var(I1) = (e^{2(c - rate) h} - 1) / (2 (c - rate))
    double var_convolution; // Var(I2) = ou_transition_variance(rate, h)
    double cross;           // Cov(I1, conj I2) = (e^{(c - 2 rate) h} - 1)/(c - 2 rate)
};
JointStepCovariance joint_step_covariance(double c, double rate, double h);

JointLinearPath sample_joint_linear(const TimeGrid& grid, int n_modes, double c,
                                    const RngStream& stream);

/// Binary snapshot of an OuPath (little-endian doubles, mode-major) so that
/// expensive fine paths can be replayed across experiments.
void save_ou_path(const OuPath& path, std::ostream& out);
OuPath load_ou_path(std::istream& in);
void save_ou_path(const OuPath& path, const std::string& filename);
OuPath load_ou_path(const std::string& filename);

} // namespace spde
