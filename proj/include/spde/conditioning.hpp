#pragma once

#include <stdexcept>
#include <vector>

namespace spde {

/// Exact optimal approximation error of the linear equation (f(u) = u,
/// u_0 = 0, T = 1) given the convolution samples on the time grid, computed
/// by per-mode Gaussian conditioning.  No scheme consuming those samples can
/// beat `total_error`.
struct ConditioningResult {
    int steps = 0;    // M
    int n_modes = 0;  // N
    std::vector<double> mode_residual;  // complex-scale residual, n = 0..N
    double tail_low = 0.0;   // explicit tail sum of unobserved-mode variances
    double tail_high = 0.0;  // explicit sum plus analytic truncation remainder
    double total_error = 0.0;       // sqrt(head + tail_low)
    double total_error_high = 0.0;  // sqrt(head + tail_high)
    double reference_floor = 0.0;   // (M^{-1} + N^{-1/2}) / 30
};

/// Raised when the observation covariance cannot be factorized even after
/// regularization; signals M too large for double precision at that mode.
struct conditioning_error : std::runtime_error {
    int mode;
    conditioning_error(int mode_, const std::string& what_);
};

/// Var(u_hat_1(n)) on the complex scale, drift coefficient 1 - 4 pi^2 n^2.
double solution_mode_variance(int n);

/// Residual Var(u_hat_1(n)) - c^T Sigma^{-1} c where Sigma is the
/// (M+1)x(M+1) covariance of the sampled convolution mode and c its
/// cross-covariance with u_hat_1(n); all entries closed-form.  SPD solve with
/// a 1e-14 diagonal regularizer guarded by a residual check.
double mode_residual_variance(int n, int steps);

/// Full assembly over |n| <= N plus the explicit tail to n_tail
/// (default max(4N, 1024)) with an analytic remainder recorded as an
/// interval.  Checks nothing; callers compare against reference_floor.
ConditioningResult lower_bound_total(int steps, int n_modes, int n_tail = 0);

/// Table over a grid, reusing per-(n, M) residuals across N values.
std::vector<ConditioningResult> conditioning_grid(const std::vector<int>& steps_values,
                                                  const std::vector<int>& mode_values,
                                                  int n_tail = 0);

} // namespace spde
