#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

#include "spde/conditioning.hpp"
#include "spde/noise.hpp"
#include "spde/quadrature.hpp"
#include "spde/spectral_ops.hpp"
#include "test_support.hpp"

using namespace spde;

namespace {

// Defining integrals of the observation model, evaluated by quadrature only.
double quad_obs_cov(double rate, double tj, double tk) {
    if (tj == 0.0 || tk == 0.0) return 0.0;
    const double lo = std::min(tj, tk);
    return adaptive_simpson(
        [&](double s) { return std::exp(-rate * (tj - s)) * std::exp(-rate * (tk - s)); }, 0.0,
        lo, 1e-15);
}

double quad_cross_cov(double rate, double tk) {
    if (tk == 0.0) return 0.0;
    return adaptive_simpson(
        [&](double s) { return std::exp((1.0 - rate) * (1.0 - s)) * std::exp(-rate * (tk - s)); },
        0.0, tk, 1e-15);
}

double quad_solution_var(double rate) {
    return adaptive_simpson(
        [&](double s) { return std::exp(2.0 * (1.0 - rate) * (1.0 - s)); }, 0.0, 1.0, 1e-15);
}

// Residual variance computed entirely from quadrature entries; independent of
// the closed forms inside the module.
double quadrature_residual(int n, int steps) {
    const double rate = mode_rate(n);
    const int m = steps + 1;
    Eigen::MatrixXd sigma(m, m);
    Eigen::VectorXd cross(m);
    for (int j = 0; j < m; ++j) {
        const double tj = static_cast<double>(j) / steps;
        cross(j) = quad_cross_cov(rate, tj);
        for (int k = j; k < m; ++k) {
            const double tk = static_cast<double>(k) / steps;
            sigma(j, k) = sigma(k, j) = quad_obs_cov(rate, tj, tk);
        }
    }
    sigma.diagonal().array() += 1e-14;
    const Eigen::VectorXd w = sigma.ldlt().solve(cross);
    return quad_solution_var(rate) - cross.dot(w);
}

} // namespace

TEST_CASE("hand-computed one-step residual") {
    // M = 1, mode 0: Var = (e^2 - 1)/2, cross = e - 1, obs var = 1.
    CHECK(mode_residual_variance(0, 1) ==
          doctest::Approx(0.242035607452765).epsilon(1e-11));
}

TEST_CASE("residuals agree with an all-quadrature reconstruction") {
    for (int n : {0, 1, 4})
        for (int steps : {4, 8}) {
            const double got = mode_residual_variance(n, steps);
            const double want = quadrature_residual(n, steps);
            CHECK(std::abs(got - want) <=
                  1e-9 * std::max(std::abs(want), solution_mode_variance(n)));
        }
}

TEST_CASE("solution variance matches quadrature and its large-n floor") {
    const double pi = std::numbers::pi;
    for (int n : {0, 1, 4, 16})
        CHECK(spde::testing::rel_diff(solution_mode_variance(n), quad_solution_var(mode_rate(n))) <
              1e-10);
    for (int n : {2, 8, 64})
        CHECK(solution_mode_variance(n) >= 1.0 / (8.0 * std::exp(1.0) * pi * pi * n * n));
}

TEST_CASE("monte-carlo regression reproduces the conditional residual") {
    // Regress u_hat_1(n) on the sampled convolution across a large ensemble
    // and compare the empirical residual variance with the closed-form one.
    const int n_samples = 20000;
    for (int steps : {4, 16})
        for (int n : {0, 1}) {
            const int m = steps + 1;
            Eigen::MatrixXd obs_re(n_samples, m), obs_im(n_samples, m);
            Eigen::VectorXd sol_re(n_samples), sol_im(n_samples);
            for (int s = 0; s < n_samples; ++s) {
                const JointLinearPath joint =
                    sample_joint_linear(TimeGrid(1.0, steps), 1, 1.0,
                                        {90210u + static_cast<std::uint64_t>(steps),
                                         static_cast<std::uint64_t>(s)});
                for (int k = 0; k < m; ++k) {
                    obs_re(s, k) = joint.ou.samples[static_cast<size_t>(k)].at(n).real();
                    obs_im(s, k) = joint.ou.samples[static_cast<size_t>(k)].at(n).imag();
                }
                sol_re(s) = joint.exact_states[static_cast<size_t>(steps)].at(n).real();
                sol_im(s) = joint.exact_states[static_cast<size_t>(steps)].at(n).imag();
            }
            const auto residual_var = [&](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
                Eigen::MatrixXd gram = X.transpose() * X;
                gram.diagonal().array() += 1e-12;
                const Eigen::VectorXd beta = gram.ldlt().solve(X.transpose() * y);
                return (y - X * beta).squaredNorm() / n_samples;
            };
            const double emp = residual_var(obs_re, sol_re) + residual_var(obs_im, sol_im);
            const double want = mode_residual_variance(n, steps);
            const double dof = n == 0 ? n_samples : 2.0 * n_samples;
            const double four_se = 4.0 * want * std::sqrt(2.0 / dof);
            CHECK(std::abs(emp - want) < four_se);
        }
}

TEST_CASE("conditioning on more data or more modes never hurts") {
    for (int n : {0, 1}) {
        double prev = 1e300;
        for (int steps : {4, 8, 16, 32}) {
            const double rv = mode_residual_variance(n, steps);
            CHECK(rv <= solution_mode_variance(n) + 1e-15);
            CHECK(rv >= 0.0);
            CHECK(rv <= prev * (1.0 + 1e-12));
            prev = rv;
        }
    }
    const ConditioningResult a = lower_bound_total(8, 8);
    const ConditioningResult b = lower_bound_total(16, 8);
    const ConditioningResult c = lower_bound_total(8, 16);
    CHECK(b.total_error <= a.total_error);
    CHECK(c.total_error <= a.total_error);
}

TEST_CASE("mode-0 residual scales as the square of the step count") {
    // Asymptotically resvar = M^{-2}/12 * int_0^1 e^{2(1-s)} ds; the plain
    // M^{-2}/12 is only a floor since the weight exceeds one.
    const double weight = (std::exp(2.0) - 1.0) / 2.0;
    for (int steps : {64, 128, 256}) {
        const double rv = mode_residual_variance(0, steps);
        const double base = 1.0 / (12.0 * static_cast<double>(steps) * steps);
        CHECK(rv >= base);
        CHECK(rv / (weight * base) == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("assembled optimal error dominates the reference floor") {
    for (int steps : {8, 64})
        for (int n_modes : {8, 64}) {
            const ConditioningResult r = lower_bound_total(steps, n_modes);
            CHECK(r.total_error >= r.reference_floor);
            CHECK(r.total_error_high >= r.total_error);
            CHECK(r.tail_high > r.tail_low);
            for (double rv : r.mode_residual) CHECK(rv >= 0.0);
        }
}

TEST_CASE("tail term dominates its analytic floor") {
    const double pi = std::numbers::pi;
    for (int n_modes : {8, 64, 256}) {
        const ConditioningResult r = lower_bound_total(16, n_modes);
        CHECK(r.tail_low >= 1.0 / (8.0 * std::exp(1.0) * pi * pi * n_modes));
    }
}

TEST_CASE("grid helper matches the one-shot assembly") {
    const auto grid_results = conditioning_grid({4, 8}, {4, 8});
    REQUIRE(grid_results.size() == 4);
    for (const auto& r : grid_results) {
        const ConditioningResult direct = lower_bound_total(r.steps, r.n_modes, 1024);
        CHECK(r.total_error == doctest::Approx(direct.total_error).epsilon(1e-12));
        CHECK(r.reference_floor == doctest::Approx(direct.reference_floor).epsilon(1e-14));
    }
}

TEST_CASE("argument validation") {
    CHECK_THROWS_AS(mode_residual_variance(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(lower_bound_total(4, 0), std::invalid_argument);
    CHECK_THROWS_AS(lower_bound_total(4, 8, 8), std::invalid_argument);
}
