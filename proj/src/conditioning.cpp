#include "spde/conditioning.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spde/noise.hpp"
#include "spde/spectral_ops.hpp"

namespace spde {

namespace {

constexpr double kDriftC = 1.0;  // f(u) = u throughout this module
constexpr double kRegularizer = 1e-14;

inline double expm1_over(double x) {
    return x == 0.0 ? 1.0 : std::expm1(x) / x;
}

// Cov(u_hat_1(n), O_hat_{t}(n)) on the complex scale:
// int_0^t e^{a (1 - s)} e^{-lambda (t - s)} ds with a = 1 - lambda.
double cross_covariance(double a, double lambda, double t) {
    return std::exp(a * (1.0 - t)) * t * expm1_over((a - lambda) * t);
}

} // namespace

conditioning_error::conditioning_error(int mode_, const std::string& what_)
    : std::runtime_error("conditioning failed at mode " + std::to_string(mode_) + ": " + what_),
      mode(mode_) {}

double solution_mode_variance(int n) {
    const double a = kDriftC - mode_rate(n);
    return expm1_over(2.0 * a);  // int_0^1 e^{2 a (1-s)} ds
}

double mode_residual_variance(int n, int steps) {
    if (steps < 1) throw std::invalid_argument("mode_residual_variance: steps must be >= 1");
    const double lambda = mode_rate(n);
    const double a = kDriftC - lambda;
    const int m = steps + 1;  // observations at t_0 = 0, ..., t_M = 1

    Eigen::MatrixXd sigma(m, m);
    Eigen::VectorXd cross(m);
    for (int j = 0; j < m; ++j) {
        const double tj = static_cast<double>(j) / steps;
        cross(j) = cross_covariance(a, lambda, tj);
        for (int k = j; k < m; ++k) {
            const double tk = static_cast<double>(k) / steps;
            const double v = std::exp(-lambda * (tk - tj)) * ou_marginal_variance(lambda, tj);
            sigma(j, k) = v;
            sigma(k, j) = v;
        }
    }
    sigma.diagonal().array() += kRegularizer;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
    if (ldlt.info() != Eigen::Success)
        throw conditioning_error(n, "factorization did not converge");
    const Eigen::VectorXd weights = ldlt.solve(cross);
    const double defect = (sigma * weights - cross).norm();
    if (defect > 1e-8 * (cross.norm() + 1e-30))
        throw conditioning_error(n, "solve residual too large (" + std::to_string(defect) + ")");

    const double residual = solution_mode_variance(n) - cross.dot(weights);
    return std::max(0.0, residual);
}

namespace {

ConditioningResult assemble(int steps, int n_modes, int n_tail,
                            const std::vector<double>& residuals) {
    ConditioningResult res;
    res.steps = steps;
    res.n_modes = n_modes;
    res.mode_residual.assign(residuals.begin(), residuals.begin() + n_modes + 1);

    double head = res.mode_residual[0];
    for (int n = 1; n <= n_modes; ++n) head += 2.0 * res.mode_residual[static_cast<size_t>(n)];

    double tail = 0.0;
    for (int n = n_modes + 1; n <= n_tail; ++n) tail += 2.0 * solution_mode_variance(n);
    // Var(u_hat_1(n)) <= 1/(2 (lambda_n - 1)); the n > n_tail remainder is at
    // most sum 1/(4 pi^2 n^2 - 1) <= 1/(4 pi^2 n_tail).
    const double pi = std::numbers::pi;
    const double remainder = 1.0 / (4.0 * pi * pi * n_tail);

    res.tail_low = tail;
    res.tail_high = tail + remainder;
    res.total_error = std::sqrt(head + res.tail_low);
    res.total_error_high = std::sqrt(head + res.tail_high);
    res.reference_floor =
        (1.0 / steps + 1.0 / std::sqrt(static_cast<double>(n_modes))) / 30.0;
    return res;
}

} // namespace

ConditioningResult lower_bound_total(int steps, int n_modes, int n_tail) {
    if (n_modes < 1) throw std::invalid_argument("lower_bound_total: need N >= 1");
    if (n_tail <= 0) n_tail = std::max(4 * n_modes, 1024);
    if (n_tail <= n_modes) throw std::invalid_argument("lower_bound_total: n_tail must exceed N");
    std::vector<double> residuals(static_cast<size_t>(n_modes) + 1);
    for (int n = 0; n <= n_modes; ++n)
        residuals[static_cast<size_t>(n)] = mode_residual_variance(n, steps);
    return assemble(steps, n_modes, n_tail, residuals);
}

std::vector<ConditioningResult> conditioning_grid(const std::vector<int>& steps_values,
                                                  const std::vector<int>& mode_values,
                                                  int n_tail) {
    const int n_max = *std::max_element(mode_values.begin(), mode_values.end());
    const int tail = n_tail > 0 ? n_tail : std::max(4 * n_max, 1024);

    std::vector<ConditioningResult> out;
    for (int steps : steps_values) {
        std::vector<double> residuals(static_cast<size_t>(n_max) + 1);
        for (int n = 0; n <= n_max; ++n)
            residuals[static_cast<size_t>(n)] = mode_residual_variance(n, steps);
        for (int n_modes : mode_values) out.push_back(assemble(steps, n_modes, tail, residuals));
    }
    return out;
}

} // namespace spde
