#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spde/noise.hpp"
#include "spde/schemes.hpp"
#include "spde/spectral_ops.hpp"
#include "test_support.hpp"

using namespace spde;
using spde::testing::max_coeff_diff;

namespace {

OuPath zero_ou(const TimeGrid& grid, int n_modes) {
    OuPath p;
    p.grid = grid;
    p.n_modes = n_modes;
    p.samples.assign(static_cast<size_t>(grid.steps) + 1, SpectralField(n_modes));
    return p;
}

WienerPath zero_wiener(const TimeGrid& grid, int n_modes) {
    WienerPath p;
    p.grid = grid;
    p.n_modes = n_modes;
    p.samples.assign(static_cast<size_t>(grid.steps) + 1, SpectralField(n_modes));
    return p;
}

} // namespace

TEST_CASE("zero reaction rides the sampled convolution exactly") {
    SchemeConfig cfg;
    cfg.n_modes = 15;
    cfg.grid = TimeGrid(1.0, 32);
    cfg.reaction = zero_reaction();
    const OuPath path = sample_ou_path(cfg.grid, cfg.n_modes, {555, 0});

    for (const Trajectory& traj : {run_exponential_euler(cfg, path), run_splitting(cfg, path)}) {
        double worst = 0.0;
        for (int k = 0; k <= cfg.grid.steps; ++k)
            worst = std::max(worst, max_coeff_diff(traj.states[static_cast<size_t>(k)],
                                                   path.samples[static_cast<size_t>(k)]));
        CHECK(worst == 0.0);
    }
}

TEST_CASE("linear reaction matches an independent scalar recursion") {
    const int N = 7, M = 16;
    const double c = 0.75;
    SchemeConfig cfg;
    cfg.n_modes = N;
    cfg.grid = TimeGrid(1.0, M);
    cfg.reaction = linear(c);
    const OuPath path = sample_ou_path(cfg.grid, N, {808, 1});
    const Trajectory traj = run_exponential_euler(cfg, path);

    const double h = cfg.grid.dt();
    double worst = 0.0;
    for (int n = 0; n <= N; ++n) {
        const double decay = std::exp(-mode_rate(n) * h);
        const double weight = heat_integral_multiplier(n, h);
        std::complex<double> v = 0.0;
        for (int k = 0; k < M; ++k)
            v = decay * v + weight * (c * v) + path.samples[static_cast<size_t>(k) + 1].at(n) -
                decay * path.samples[static_cast<size_t>(k)].at(n);
        worst = std::max(worst, std::abs(v - traj.states.back().at(n)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("one noiseless splitting step moves a constant by the flow") {
    SchemeConfig cfg;
    cfg.n_modes = 7;
    cfg.grid = TimeGrid(0.25, 1);
    cfg.reaction = allen_cahn();
    cfg.u0 = SpectralField::mode(0, 0.4, 7);
    const Trajectory traj = run_splitting(cfg, zero_ou(cfg.grid, 7));
    CHECK(traj.states[1].at(0).real() ==
          doctest::Approx(flow(cfg.reaction, 0.25, 0.4)).epsilon(1e-13));
    for (int n = 1; n <= 7; ++n) CHECK(std::abs(traj.states[1].at(n)) < 1e-15);
}

TEST_CASE("flow route and averaged-drift route agree over a full run") {
    SchemeConfig cfg;
    cfg.n_modes = 63;
    cfg.grid = TimeGrid(1.0, 256);
    cfg.reaction = allen_cahn();
    const OuPath path = sample_ou_path(cfg.grid, cfg.n_modes, {2718, 0});
    const Trajectory a = run_splitting(cfg, path);
    const Trajectory b = run_splitting_averaged(cfg, path);
    double worst = 0.0;
    for (int k = 0; k <= cfg.grid.steps; ++k)
        worst = std::max(worst, field_norm(a.states[static_cast<size_t>(k)] -
                                               b.states[static_cast<size_t>(k)],
                                           NormKind::L2));
    CHECK(worst < 1e-9);
    CHECK(worst > 0.0);  // genuinely distinct floating-point routes
}

TEST_CASE("baseline with zero reaction: one step is the damped increment") {
    SchemeConfig cfg;
    cfg.n_modes = 3;
    cfg.grid = TimeGrid(0.5, 1);
    cfg.reaction = zero_reaction();
    const WienerPath path = sample_wiener_path(cfg.grid, 3, {14, 5});
    const Trajectory traj = run_wiener_baseline(cfg, path);
    const double h = cfg.grid.dt();
    for (int n = 0; n <= 3; ++n) {
        const auto want = std::exp(-mode_rate(n) * h) * path.samples[1].at(n);
        CHECK(std::abs(traj.states[1].at(n) - want) < 1e-15);
    }
}

TEST_CASE("baseline step variance matches the damped-increment law") {
    SchemeConfig cfg;
    cfg.n_modes = 1;
    cfg.grid = TimeGrid(0.5, 1);
    cfg.reaction = zero_reaction();
    const double h = cfg.grid.dt();
    const int n_samples = 6000;
    double mean_sq = 0.0;
    for (int s = 0; s < n_samples; ++s) {
        const WienerPath path =
            sample_wiener_path(cfg.grid, 1, {606, static_cast<std::uint64_t>(s)});
        mean_sq += std::norm(run_wiener_baseline(cfg, path).states[1].at(1));
    }
    mean_sq /= n_samples;
    const double want = std::exp(-2.0 * mode_rate(1) * h) * h;
    // SE of the mean of an exponential-ish variable ~ want / sqrt(n)
    CHECK(std::abs(mean_sq - want) < 4.0 * want / std::sqrt(static_cast<double>(n_samples)));
}

TEST_CASE("noiseless baseline reduces to the heat flow of u0") {
    SchemeConfig cfg;
    cfg.n_modes = 5;
    cfg.grid = TimeGrid(1.0, 8);
    cfg.reaction = zero_reaction();
    cfg.u0 = spde::testing::random_field(5, 33);
    const Trajectory traj = run_wiener_baseline(cfg, zero_wiener(cfg.grid, 5));
    double worst = 0.0;
    for (int k = 0; k <= 8; ++k)
        worst = std::max(worst, max_coeff_diff(traj.states[static_cast<size_t>(k)],
                                               apply_heat(cfg.u0, cfg.grid.point(k))));
    CHECK(worst < 1e-13);
}

TEST_CASE("superlinear reaction under the baseline blows up with a step index") {
    SchemeConfig cfg;
    cfg.n_modes = 3;
    cfg.grid = TimeGrid(1.0, 4);
    cfg.reaction = allen_cahn();
    cfg.u0 = SpectralField::mode(0, 1e60, 3);  // cubing overflows within two steps
    CHECK_THROWS_AS(run_wiener_baseline(cfg, zero_wiener(cfg.grid, 3)), blow_up_error);
    try {
        run_wiener_baseline(cfg, zero_wiener(cfg.grid, 3));
    } catch (const blow_up_error& e) {
        CHECK(e.step >= 1);
        CHECK(e.step <= 4);
    }
}

TEST_CASE("reruns on the same path are bit-identical") {
    SchemeConfig cfg;
    cfg.n_modes = 31;
    cfg.grid = TimeGrid(1.0, 64);
    cfg.reaction = allen_cahn();
    const OuPath path = sample_ou_path(cfg.grid, cfg.n_modes, {4242, 0});
    const Trajectory a = run_splitting(cfg, path);
    const Trajectory b = run_splitting(cfg, path);
    double worst = 0.0;
    for (int k = 0; k <= 64; ++k)
        worst = std::max(worst, max_coeff_diff(a.states[static_cast<size_t>(k)],
                                               b.states[static_cast<size_t>(k)]));
    CHECK(worst == 0.0);
}

TEST_CASE("scheme rejects mismatched noise") {
    SchemeConfig cfg;
    cfg.n_modes = 8;
    cfg.grid = TimeGrid(1.0, 8);
    cfg.reaction = zero_reaction();
    CHECK_THROWS_AS(run_exponential_euler(cfg, zero_ou(TimeGrid(1.0, 16), 8)),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_exponential_euler(cfg, zero_ou(cfg.grid, 4)), std::invalid_argument);
}

TEST_CASE("observer streams every accepted state in order") {
    SchemeConfig cfg;
    cfg.n_modes = 4;
    cfg.grid = TimeGrid(1.0, 8);
    cfg.reaction = bounded_sin(1.0);
    const OuPath path = sample_ou_path(cfg.grid, 4, {12, 0});
    int next_expected = 0;
    run_exponential_euler(cfg, path, [&](int k, const SpectralField& s) {
        CHECK(k == next_expected);
        CHECK(s.n_modes == 4);
        ++next_expected;
    });
    CHECK(next_expected == 9);
}
