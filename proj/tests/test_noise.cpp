#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "spde/noise.hpp"
#include "spde/quadrature.hpp"
#include "spde/spectral_ops.hpp"
#include "test_support.hpp"

using namespace spde;
using spde::testing::max_coeff_diff;

namespace {

struct Moments {
    double mean = 0.0;
    double se = 0.0;
};

// mean and standard error of |values|^2 (complex second moment)
Moments second_moment(const std::vector<std::complex<double>>& values) {
    double m = 0.0;
    for (const auto& v : values) m += std::norm(v);
    m /= static_cast<double>(values.size());
    double var = 0.0;
    for (const auto& v : values) var += (std::norm(v) - m) * (std::norm(v) - m);
    var /= static_cast<double>(values.size() - 1);
    return {m, std::sqrt(var / static_cast<double>(values.size()))};
}

} // namespace

TEST_CASE("sampling is a pure function of seed and stream") {
    const TimeGrid grid(1.0, 16);
    const OuPath a = sample_ou_path(grid, 8, {123, 7});
    const OuPath b = sample_ou_path(grid, 8, {123, 7});
    const OuPath c = sample_ou_path(grid, 8, {123, 8});
    double worst = 0.0;
    for (int k = 0; k <= 16; ++k)
        worst = std::max(worst, max_coeff_diff(a.samples[static_cast<size_t>(k)],
                                               b.samples[static_cast<size_t>(k)]));
    CHECK(worst == 0.0);
    CHECK(max_coeff_diff(a.samples[16], c.samples[16]) > 0.0);
    CHECK(field_norm(a.samples[0], NormKind::L2) == 0.0);  // starts at zero
}

TEST_CASE("convolution marginals match the exact law") {
    const TimeGrid grid(1.0, 8);
    const int n_samples = 10000;
    std::vector<std::complex<double>> mode1_end, mode0_end, mode1_mid;
    for (int s = 0; s < n_samples; ++s) {
        const OuPath p = sample_ou_path(grid, 2, {2024, static_cast<std::uint64_t>(s)});
        mode1_end.push_back(p.samples[8].at(1));
        mode1_mid.push_back(p.samples[4].at(1));
        mode0_end.push_back(p.samples[8].at(0));
    }

    // stationary variance of mode 1 at t = 1: 1/(8 pi^2) ~ 0.0126651
    const double pi = std::numbers::pi;
    const auto m1 = second_moment(mode1_end);
    CHECK(std::abs(m1.mean - 1.0 / (8.0 * pi * pi)) < 4.0 * m1.se);
    CHECK(1.0 / (8.0 * pi * pi) == doctest::Approx(0.0126651).epsilon(1e-5));

    // mode 0 is Brownian: variance t
    const auto m0 = second_moment(mode0_end);
    CHECK(std::abs(m0.mean - 1.0) < 4.0 * m0.se);

    // mid-grid marginal against quadrature of the defining integral
    const double rate = mode_rate(1);
    const double want = adaptive_simpson(
        [rate](double s) { return std::exp(-2.0 * rate * s); }, 0.0, 0.5, 1e-15);
    const auto mm = second_moment(mode1_mid);
    CHECK(std::abs(mm.mean - want) < 4.0 * mm.se);
    CHECK(spde::testing::rel_diff(ou_marginal_variance(rate, 0.5), want) < 1e-11);
}

TEST_CASE("innovations are uncorrelated across steps and modes") {
    const TimeGrid grid(1.0, 4);
    const double h = grid.dt();
    const int n_samples = 4000;
    std::vector<double> eta_k0_n1, eta_k1_n1, eta_k0_n2, eta_k2_n0, eta_k3_n0;
    for (int s = 0; s < n_samples; ++s) {
        const OuPath p = sample_ou_path(grid, 2, {77, static_cast<std::uint64_t>(s)});
        const auto innov = [&](int k, int n) {
            return (p.samples[static_cast<size_t>(k) + 1].at(n) -
                    std::exp(-mode_rate(n) * h) * p.samples[static_cast<size_t>(k)].at(n));
        };
        eta_k0_n1.push_back(innov(0, 1).real());
        eta_k1_n1.push_back(innov(1, 1).real());
        eta_k0_n2.push_back(innov(0, 2).real());
        eta_k2_n0.push_back(innov(2, 0).real());
        eta_k3_n0.push_back(innov(3, 0).real());
    }
    const auto corr = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double ma = 0, mb = 0;
        for (size_t i = 0; i < a.size(); ++i) {
            ma += a[i];
            mb += b[i];
        }
        ma /= static_cast<double>(a.size());
        mb /= static_cast<double>(a.size());
        double saa = 0, sbb = 0, sab = 0;
        for (size_t i = 0; i < a.size(); ++i) {
            saa += (a[i] - ma) * (a[i] - ma);
            sbb += (b[i] - mb) * (b[i] - mb);
            sab += (a[i] - ma) * (b[i] - mb);
        }
        return sab / std::sqrt(saa * sbb);
    };
    const double four_se = 4.0 / std::sqrt(static_cast<double>(n_samples));
    CHECK(std::abs(corr(eta_k0_n1, eta_k1_n1)) < four_se);  // across steps
    CHECK(std::abs(corr(eta_k0_n1, eta_k0_n2)) < four_se);  // across modes
    CHECK(std::abs(corr(eta_k2_n0, eta_k3_n0)) < four_se);  // Brownian mode
}

TEST_CASE("subsampling preserves exactness") {
    const TimeGrid grid(1.0, 32);
    const OuPath p = sample_ou_path(grid, 4, {5, 0});

    const OuPath same = subsample(p, 1);
    CHECK(same.grid.steps == 32);
    CHECK(max_coeff_diff(same.samples[17], p.samples[17]) == 0.0);

    const OuPath a = subsample(subsample(p, 2), 2);
    const OuPath b = subsample(p, 4);
    CHECK(a.grid.steps == b.grid.steps);
    double worst = 0.0;
    for (int k = 0; k <= a.grid.steps; ++k)
        worst = std::max(worst, max_coeff_diff(a.samples[static_cast<size_t>(k)],
                                               b.samples[static_cast<size_t>(k)]));
    CHECK(worst == 0.0);

    CHECK_THROWS_AS(subsample(p, 3), std::invalid_argument);
}

TEST_CASE("coarse innovations from a factor-2 subsample have the coarse variance") {
    const TimeGrid grid(1.0, 8);
    const double h2 = 2.0 * grid.dt();
    const int n_samples = 6000;
    const double rate = mode_rate(1);
    std::vector<std::complex<double>> innovations;
    for (int s = 0; s < n_samples; ++s) {
        const OuPath fine = sample_ou_path(grid, 1, {31337, static_cast<std::uint64_t>(s)});
        const OuPath coarse = subsample(fine, 2);
        innovations.push_back(coarse.samples[2].at(1) -
                              std::exp(-rate * h2) * coarse.samples[1].at(1));
    }
    const auto m = second_moment(innovations);
    CHECK(std::abs(m.mean - ou_transition_variance(rate, h2)) < 4.0 * m.se);
}

TEST_CASE("direct coarse sampling and subsampled fine sampling agree in law") {
    const int n_samples = 6000;
    std::vector<std::complex<double>> direct, thinned;
    for (int s = 0; s < n_samples; ++s) {
        const auto id = static_cast<std::uint64_t>(s);
        direct.push_back(sample_ou_path(TimeGrid(1.0, 4), 1, {1, id}).samples[4].at(1));
        thinned.push_back(
            subsample(sample_ou_path(TimeGrid(1.0, 8), 1, {2, id}), 2).samples[4].at(1));
    }
    const auto a = second_moment(direct);
    const auto b = second_moment(thinned);
    CHECK(std::abs(a.mean - b.mean) < 4.0 * std::sqrt(a.se * a.se + b.se * b.se));
}

TEST_CASE("wiener path moments, independence, determinism") {
    const TimeGrid grid(1.0, 8);
    const int n_samples = 8000;
    std::vector<std::complex<double>> w_end;
    std::vector<double> inc_a, inc_b;
    for (int s = 0; s < n_samples; ++s) {
        const WienerPath p = sample_wiener_path(grid, 2, {99, static_cast<std::uint64_t>(s)});
        w_end.push_back(p.samples[8].at(1));
        inc_a.push_back((p.samples[2].at(1) - p.samples[1].at(1)).real());
        inc_b.push_back((p.samples[6].at(1) - p.samples[5].at(1)).real());
    }
    const auto m = second_moment(w_end);
    CHECK(std::abs(m.mean - 1.0) < 4.0 * m.se);

    double sab = 0.0;
    for (size_t i = 0; i < inc_a.size(); ++i) sab += inc_a[i] * inc_b[i];
    sab /= static_cast<double>(n_samples);
    // each increment component has variance h/2 = 1/16
    CHECK(std::abs(sab) < 4.0 * (1.0 / 16.0) / std::sqrt(static_cast<double>(n_samples)));

    const WienerPath p1 = sample_wiener_path(grid, 4, {5, 6});
    const WienerPath p2 = sample_wiener_path(grid, 4, {5, 6});
    CHECK(max_coeff_diff(p1.samples[8], p2.samples[8]) == 0.0);
}

TEST_CASE("joint linear sampler: c = 0 collapses onto the convolution") {
    const TimeGrid grid(1.0, 16);
    const JointLinearPath joint = sample_joint_linear(grid, 4, 0.0, {17, 3});
    double worst = 0.0;
    for (int k = 0; k <= 16; ++k)
        worst = std::max(worst, max_coeff_diff(joint.exact_states[static_cast<size_t>(k)],
                                               joint.ou.samples[static_cast<size_t>(k)]));
    CHECK(worst == 0.0);
}

TEST_CASE("joint step covariance matches quadrature of the defining integrals") {
    const double c = 1.0, h = 0.125;
    for (int n : {0, 1, 4}) {
        const double rate = mode_rate(n);
        const auto cov = joint_step_covariance(c, rate, h);
        const double q_sol = adaptive_simpson(
            [&](double s) { return std::exp(2.0 * (c - rate) * s); }, 0.0, h, 1e-15);
        const double q_conv = adaptive_simpson(
            [&](double s) { return std::exp(-2.0 * rate * s); }, 0.0, h, 1e-15);
        const double q_cross = adaptive_simpson(
            [&](double s) { return std::exp((c - rate) * s) * std::exp(-rate * s); }, 0.0, h,
            1e-15);
        CHECK(spde::testing::rel_diff(cov.var_solution, q_sol) < 1e-9);
        CHECK(spde::testing::rel_diff(cov.var_convolution, q_conv) < 1e-9);
        CHECK(spde::testing::rel_diff(cov.cross, q_cross) < 1e-9);
    }
    // degenerate drifts fall back to the h limit
    CHECK(joint_step_covariance(mode_rate(1), mode_rate(1), h).var_solution ==
          doctest::Approx(h));
    CHECK(joint_step_covariance(2.0 * mode_rate(1), mode_rate(1), h).cross ==
          doctest::Approx(h));
}

TEST_CASE("joint linear marginal variance: empirical and floor") {
    const TimeGrid grid(1.0, 8);
    const int n_samples = 8000;
    std::vector<std::complex<double>> u_end;
    for (int s = 0; s < n_samples; ++s)
        u_end.push_back(
            sample_joint_linear(grid, 1, 1.0, {404, static_cast<std::uint64_t>(s)})
                .exact_states[8]
                .at(1));
    // Var(u_hat_1(1)) = int_0^1 e^{2 (1 - rate)(1 - s)} ds
    const double rate = mode_rate(1);
    const double want = adaptive_simpson(
        [&](double s) { return std::exp(2.0 * (1.0 - rate) * (1.0 - s)); }, 0.0, 1.0, 1e-15);
    const auto m = second_moment(u_end);
    CHECK(std::abs(m.mean - want) < 4.0 * m.se);

    // large-n floor 1/(8 e pi^2 n^2)
    const double pi = std::numbers::pi;
    for (int n : {2, 8, 32}) {
        const double var = adaptive_simpson(
            [&](double s) { return std::exp(2.0 * (1.0 - mode_rate(n)) * (1.0 - s)); }, 0.0, 1.0,
            1e-16);
        CHECK(var >= 1.0 / (8.0 * std::exp(1.0) * pi * pi * n * n));
    }
}

TEST_CASE("binary snapshot round-trips bit-for-bit") {
    const OuPath p = sample_ou_path(TimeGrid(0.75, 12), 6, {91, 2});
    std::stringstream buf;
    save_ou_path(p, buf);
    const OuPath q = load_ou_path(buf);
    CHECK(q.grid.steps == p.grid.steps);
    CHECK(q.grid.horizon == p.grid.horizon);
    CHECK(q.n_modes == p.n_modes);
    CHECK(q.stream.base_seed == p.stream.base_seed);
    CHECK(q.stream.stream_id == p.stream.stream_id);
    double worst = 0.0;
    for (int k = 0; k <= 12; ++k)
        worst = std::max(worst, max_coeff_diff(p.samples[static_cast<size_t>(k)],
                                               q.samples[static_cast<size_t>(k)]));
    CHECK(worst == 0.0);

    std::stringstream bad("not a path");
    CHECK_THROWS_AS(load_ou_path(bad), std::runtime_error);
}

TEST_CASE("mode projection of a path truncates every sample") {
    const OuPath p = sample_ou_path(TimeGrid(1.0, 8), 6, {3, 4});
    const OuPath q = project_modes(p, 2);
    CHECK(q.n_modes == 2);
    CHECK(q.samples[5].at(1) == p.samples[5].at(1));
    CHECK_THROWS_AS(project_modes(q, 4), std::invalid_argument);
}
