#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "spde/schemes.hpp"
#include "spde/spectral_ops.hpp"

namespace spde {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Dyadic frequency blocks and Besov norms
// ---------------------------------------------------------------------------

struct BesovSpec {
    double theta = 0.0;  // regularity index
    double p = kInf;     // spatial integrability
    double q = kInf;     // aggregation over blocks
    enum class BlockFamily { smooth_dyadic } family = BlockFamily::smooth_dyadic;
};

/// rho_j evaluated at wavenumber x.  rho_{-1} is a smooth bump equal to 1 on
/// [0, 3/8] and vanishing past 1/2; rho_j(x) = rho_{-1}(2^{-j-1} x) -
/// rho_{-1}(2^{-j} x) for j >= 0.  The family telescopes to 1 everywhere.
double block_weight(int j, double x);

/// Largest block index with support intersecting |k| <= n_modes; block
/// indices -1 .. max_block_index(N) give an exact partition on the band.
int max_block_index(int n_modes);

/// Frequency-localized piece: coefficient k scaled by rho_j(k).
SpectralField littlewood_paley_block(const SpectralField& field, int j);

/// || (2^{j theta} ||Delta_j u||_{L^p})_j ||_{l^q}; block L^p norms are
/// evaluated on oversampled physical grids (sup estimate for p = inf).
double besov_norm(const SpectralField& field, const BesovSpec& spec);

// ---------------------------------------------------------------------------
// Errors and rate fitting
// ---------------------------------------------------------------------------

/// Discrete sup-in-time strong error: max over a's grid points of
/// ||a_k - b_k'||, where b's grid refines a's by an integer factor and k' is
/// the aligned index.  Fields of unequal band are compared in the union mode
/// space, so a truncated run against a wider reference keeps the reference's
/// spectral tail in the difference.
double error_between(const Trajectory& a, const Trajectory& b, NormKind norm);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // root mean squared log2 residual
};

/// Ordinary least squares of log2 y against log2 x; all inputs must be
/// positive and at least two points are required.
RateFit fit_rate(std::span<const double> x, std::span<const double> y);

enum class StudyAxis { temporal, spatial };

struct RatePoint {
    int resolution = 0;      // M (temporal) or N (spatial)
    double mean_sq_error = 0.0;
    double std_err = 0.0;    // standard error of the mean squared error
    double rms_error = 0.0;
    int n_samples = 0;
};

struct RateReport {
    StudyAxis axis = StudyAxis::temporal;
    std::vector<RatePoint> points;
    bool slope_defined = false;
    double slope_mean_sq = 0.0;  // log2-log2 slope of the mean squared error
    double slope_rms = 0.0;      // = slope_mean_sq / 2, identically
    double intercept = 0.0;
    double residual = 0.0;
    int fit_begin = 0;  // fitted window [fit_begin, fit_end) into points
    int fit_end = 0;
};

struct StudyConfig {
    SchemeKind scheme = SchemeKind::splitting;
    Nonlinearity reaction;
    double horizon = 1.0;
    SpectralField u0;  // empty -> zero
    int oversample = 4;
    NormKind norm = NormKind::L2;

    StudyAxis axis = StudyAxis::temporal;
    int n_modes = 0;                // spatial band (temporal axis)
    int steps = 0;                  // time steps (spatial axis)
    std::vector<int> resolutions;   // ascending ladder: M values or N values
    int finest = 0;                 // reference M or reference N

    int n_samples = 1;
    std::uint64_t base_seed = 0;
    int threads = 1;
    int fit_begin = -1;  // -1 -> upper half of the ladder
};

struct study_failure : std::runtime_error {
    std::uint64_t stream_id;
    int step;
    study_failure(std::uint64_t stream, int step_);
};

/// Coupled Monte-Carlo rate study: each stream draws one fine noise path,
/// runs the reference at the finest resolution and every ladder entry on the
/// restricted path, and records the sup-in-time error against the reference.
/// Streams are distributed over a worker pool; aggregation reads results in
/// stream order, so the output is independent of the thread count.
RateReport convergence_study(const StudyConfig& cfg);

// ---------------------------------------------------------------------------
// Path regularity diagnostics
// ---------------------------------------------------------------------------

using FieldNorm = std::function<double(const SpectralField&)>;

FieldNorm make_linf_norm(int eval_resolution = 0);
FieldNorm make_besov_field_norm(const BesovSpec& spec);

/// Norms of state increments over `lag_steps` grid steps, at up to
/// `max_base_points` evenly spaced base indices.
std::vector<double> increment_norms(std::span<const SpectralField> states, int lag_steps,
                                    const FieldNorm& norm, int max_base_points = 128);

struct HolderEstimate {
    std::vector<double> lags;     // lag durations
    std::vector<double> medians;  // median increment norm per lag
    double exponent = 0.0;        // fitted log-log slope
};

/// Median-based empirical Hoelder exponent over the dyadic lag ladder
/// 2^{-l} T, l = 2 .. log2(M) - 2.  Rejects paths that are identically zero.
HolderEstimate holder_exponent(std::span<const SpectralField> states, const TimeGrid& grid,
                               const FieldNorm& norm, int max_base_points = 128);

} // namespace spde
