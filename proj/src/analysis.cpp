#include "spde/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "spde/fft.hpp"

namespace spde {

// ---------------------------------------------------------------------------
// Block family
// ---------------------------------------------------------------------------

namespace {

// C-infinity switch: 1 at t <= 0, 0 at t >= 1.
double smooth_switch(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / (1.0 - t));
    const double b = std::exp(-1.0 / t);
    return a / (a + b);
}

// Bump: 1 on [0, 3/8], smooth decay to 0 at 1/2.
double base_bump(double r) {
    return smooth_switch((r - 0.375) / 0.125);
}

} // namespace

double block_weight(int j, double x) {
    const double r = std::abs(x);
    if (j == -1) return base_bump(r);
    const double scale = std::ldexp(1.0, -j);  // 2^{-j}
    return base_bump(0.5 * scale * r) - base_bump(scale * r);
}

int max_block_index(int n_modes) {
    // Block j covers |x| in [3/8 * 2^j, 2^j]; past this index every weight
    // vanishes on the band.
    int j = 0;
    while (0.375 * std::ldexp(1.0, j) <= static_cast<double>(n_modes)) ++j;
    return std::max(-1, j - 1);
}

SpectralField littlewood_paley_block(const SpectralField& field, int j) {
    if (j < -1) throw std::invalid_argument("littlewood_paley_block: j must be >= -1");
    SpectralField out = field;
    for (int k = 0; k <= out.n_modes; ++k)
        out.coeffs[static_cast<size_t>(k)] *= block_weight(j, static_cast<double>(k));
    return out;
}

namespace {

double block_lp_norm(const SpectralField& block, double p) {
    if (std::isinf(p)) return field_norm(block, NormKind::Linf);
    if (p == 2.0) return field_norm(block, NormKind::L2);
    const int n_x = fft::next_fast_size(std::max(32, 4 * (2 * block.n_modes + 1)));
    RealGridField phys = to_physical(block, n_x);
    double acc = 0.0;
    for (double v : phys.values) acc += std::pow(std::abs(v), p);
    return std::pow(acc / n_x, 1.0 / p);
}

} // namespace

double besov_norm(const SpectralField& field, const BesovSpec& spec) {
    const int j_max = max_block_index(field.n_modes);
    double acc = 0.0;
    for (int j = -1; j <= j_max; ++j) {
        const double a = std::pow(2.0, j * spec.theta) *
                         block_lp_norm(littlewood_paley_block(field, j), spec.p);
        if (std::isinf(spec.q))
            acc = std::max(acc, a);
        else
            acc += std::pow(a, spec.q);
    }
    return std::isinf(spec.q) ? acc : std::pow(acc, 1.0 / spec.q);
}

// ---------------------------------------------------------------------------
// Errors and fitting
// ---------------------------------------------------------------------------

double error_between(const Trajectory& a, const Trajectory& b, NormKind norm) {
    if (a.grid.horizon != b.grid.horizon || b.grid.steps % a.grid.steps != 0)
        throw std::invalid_argument("error_between: grids are not nested");
    const int factor = b.grid.steps / a.grid.steps;
    double worst = 0.0;
    for (int k = 0; k <= a.grid.steps; ++k) {
        const SpectralField diff =
            a.states[static_cast<size_t>(k)] - b.states[static_cast<size_t>(k) * factor];
        worst = std::max(worst, field_norm(diff, norm));
    }
    return worst;
}

RateFit fit_rate(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_rate: need at least two matched points");
    const size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::invalid_argument("fit_rate: points must be positive");
        const double lx = std::log2(x[i]);
        const double ly = std::log2(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("fit_rate: degenerate abscissae");
    RateFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double r = std::log2(y[i]) - (fit.intercept + fit.slope * std::log2(x[i]));
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

study_failure::study_failure(std::uint64_t stream, int step_)
    : std::runtime_error("study stream " + std::to_string(stream) +
                         " blew up at step " + std::to_string(step_)),
      stream_id(stream), step(step_) {}

namespace {

struct StreamResult {
    std::vector<double> errors;  // one per ladder entry
    bool failed = false;
    int fail_step = 0;
};

void validate_study(const StudyConfig& cfg) {
    if (cfg.resolutions.empty()) throw std::invalid_argument("study: empty ladder");
    if (!std::is_sorted(cfg.resolutions.begin(), cfg.resolutions.end()))
        throw std::invalid_argument("study: ladder must be ascending");
    if (cfg.n_samples < 1) throw std::invalid_argument("study: need samples >= 1");
    if (cfg.axis == StudyAxis::temporal) {
        if (cfg.n_modes < 0 || cfg.finest < cfg.resolutions.back())
            throw std::invalid_argument("study: invalid temporal configuration");
        const int coarse_union = cfg.resolutions.back();
        if (cfg.finest % coarse_union != 0)
            throw std::invalid_argument("study: ladder top must divide the reference M");
        for (int m : cfg.resolutions)
            if (coarse_union % m != 0)
                throw std::invalid_argument("study: ladder entries must divide the ladder top");
    } else {
        if (cfg.steps < 1 || cfg.finest < cfg.resolutions.back())
            throw std::invalid_argument("study: invalid spatial configuration");
        if (cfg.scheme == SchemeKind::wiener_baseline)
            throw std::invalid_argument("study: spatial axis expects a convolution-driven scheme");
    }
}

StreamResult temporal_stream(const StudyConfig& cfg, std::uint64_t stream_id) {
    StreamResult res;
    const TimeGrid fine_grid(cfg.horizon, cfg.finest);
    const int union_m = cfg.resolutions.back();
    const int ref_stride = cfg.finest / union_m;
    const RngStream stream{cfg.base_seed, stream_id};

    SchemeConfig run_cfg;
    run_cfg.n_modes = cfg.n_modes;
    run_cfg.u0 = cfg.u0;
    run_cfg.reaction = cfg.reaction;
    run_cfg.oversample = cfg.oversample;

    // Restrict the reference to the ladder-top grid while it streams.
    Trajectory ref;
    ref.grid = TimeGrid(cfg.horizon, union_m);
    ref.n_modes = cfg.n_modes;
    ref.scheme = cfg.scheme;
    ref.states.reserve(static_cast<size_t>(union_m) + 1);
    const StateObserver keep_subsampled = [&](int k, const SpectralField& s) {
        if (k % ref_stride == 0) ref.states.push_back(s);
    };

    try {
        if (cfg.scheme == SchemeKind::wiener_baseline) {
            const WienerPath fine = sample_wiener_path(fine_grid, cfg.n_modes, stream);
            run_cfg.grid = fine_grid;
            run_wiener_baseline(run_cfg, fine, keep_subsampled);
            for (int m : cfg.resolutions) {
                run_cfg.grid = TimeGrid(cfg.horizon, m);
                const Trajectory traj =
                    run_wiener_baseline(run_cfg, subsample(fine, cfg.finest / m));
                res.errors.push_back(error_between(traj, ref, cfg.norm));
            }
        } else {
            const OuPath fine = sample_ou_path(fine_grid, cfg.n_modes, stream);
            const bool split = cfg.scheme == SchemeKind::splitting;
            run_cfg.grid = fine_grid;
            if (split)
                run_splitting(run_cfg, fine, keep_subsampled);
            else
                run_exponential_euler(run_cfg, fine, keep_subsampled);
            for (int m : cfg.resolutions) {
                run_cfg.grid = TimeGrid(cfg.horizon, m);
                const OuPath coarse = subsample(fine, cfg.finest / m);
                const Trajectory traj = split ? run_splitting(run_cfg, coarse)
                                              : run_exponential_euler(run_cfg, coarse);
                res.errors.push_back(error_between(traj, ref, cfg.norm));
            }
        }
    } catch (const blow_up_error& e) {
        res.failed = true;
        res.fail_step = e.step;
    }
    return res;
}

StreamResult spatial_stream(const StudyConfig& cfg, std::uint64_t stream_id) {
    StreamResult res;
    const TimeGrid grid(cfg.horizon, cfg.steps);
    const RngStream stream{cfg.base_seed, stream_id};

    SchemeConfig run_cfg;
    run_cfg.grid = grid;
    run_cfg.u0 = cfg.u0;
    run_cfg.reaction = cfg.reaction;
    run_cfg.oversample = cfg.oversample;

    try {
        const OuPath fine = sample_ou_path(grid, cfg.finest, stream);
        const bool split = cfg.scheme == SchemeKind::splitting;
        run_cfg.n_modes = cfg.finest;
        const Trajectory ref =
            split ? run_splitting(run_cfg, fine) : run_exponential_euler(run_cfg, fine);
        for (int n : cfg.resolutions) {
            run_cfg.n_modes = n;
            const OuPath coarse = project_modes(fine, n);
            const Trajectory traj = split ? run_splitting(run_cfg, coarse)
                                          : run_exponential_euler(run_cfg, coarse);
            res.errors.push_back(error_between(traj, ref, cfg.norm));
        }
    } catch (const blow_up_error& e) {
        res.failed = true;
        res.fail_step = e.step;
    }
    return res;
}

} // namespace

RateReport convergence_study(const StudyConfig& cfg) {
    validate_study(cfg);

    std::vector<StreamResult> slots(static_cast<size_t>(cfg.n_samples));
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= cfg.n_samples) break;
            const auto id = static_cast<std::uint64_t>(i);
            slots[static_cast<size_t>(i)] = cfg.axis == StudyAxis::temporal
                                                ? temporal_stream(cfg, id)
                                                : spatial_stream(cfg, id);
        }
    };

    const int n_workers = std::max(1, std::min(cfg.threads, cfg.n_samples));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(n_workers));
        for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Deterministic reduction in stream order.
    for (int i = 0; i < cfg.n_samples; ++i)
        if (slots[static_cast<size_t>(i)].failed)
            throw study_failure(static_cast<std::uint64_t>(i),
                                slots[static_cast<size_t>(i)].fail_step);

    RateReport report;
    report.axis = cfg.axis;
    const size_t n_res = cfg.resolutions.size();
    for (size_t r = 0; r < n_res; ++r) {
        RatePoint pt;
        pt.resolution = cfg.resolutions[r];
        pt.n_samples = cfg.n_samples;
        double mean = 0.0;
        for (int i = 0; i < cfg.n_samples; ++i) {
            const double e = slots[static_cast<size_t>(i)].errors[r];
            mean += e * e;
        }
        mean /= cfg.n_samples;
        double var = 0.0;
        for (int i = 0; i < cfg.n_samples; ++i) {
            const double e = slots[static_cast<size_t>(i)].errors[r];
            var += (e * e - mean) * (e * e - mean);
        }
        var = cfg.n_samples > 1 ? var / (cfg.n_samples - 1) : 0.0;
        pt.mean_sq_error = mean;
        pt.std_err = std::sqrt(var / cfg.n_samples);
        pt.rms_error = std::sqrt(mean);
        report.points.push_back(pt);
    }

    report.fit_begin = cfg.fit_begin >= 0 ? cfg.fit_begin : static_cast<int>(n_res) / 2;
    report.fit_end = static_cast<int>(n_res);
    std::vector<double> xs, ys;
    for (int r = report.fit_begin; r < report.fit_end; ++r) {
        xs.push_back(static_cast<double>(report.points[static_cast<size_t>(r)].resolution));
        ys.push_back(report.points[static_cast<size_t>(r)].mean_sq_error);
    }
    try {
        const RateFit fit = fit_rate(xs, ys);
        report.slope_defined = true;
        report.slope_mean_sq = fit.slope;
        report.slope_rms = 0.5 * fit.slope;
        report.intercept = fit.intercept;
        report.residual = fit.residual;
    } catch (const std::invalid_argument&) {
        report.slope_defined = false;  // e.g. exactly-zero coupled errors
    }
    return report;
}

// ---------------------------------------------------------------------------
// Regularity diagnostics
// ---------------------------------------------------------------------------

FieldNorm make_linf_norm(int eval_resolution) {
    return [eval_resolution](const SpectralField& f) {
        return field_norm(f, NormKind::Linf, eval_resolution);
    };
}

FieldNorm make_besov_field_norm(const BesovSpec& spec) {
    return [spec](const SpectralField& f) { return besov_norm(f, spec); };
}

std::vector<double> increment_norms(std::span<const SpectralField> states, int lag_steps,
                                    const FieldNorm& norm, int max_base_points) {
    const int last_base = static_cast<int>(states.size()) - 1 - lag_steps;
    if (lag_steps < 1 || last_base < 0)
        throw std::invalid_argument("increment_norms: lag out of range");
    const int n_base = std::min(max_base_points, last_base + 1);
    std::vector<double> out;
    out.reserve(static_cast<size_t>(n_base));
    for (int i = 0; i < n_base; ++i) {
        const int k = n_base == 1 ? 0 : static_cast<int>(
            (static_cast<long long>(i) * last_base) / (n_base - 1));
        out.push_back(norm(states[static_cast<size_t>(k) + lag_steps] -
                           states[static_cast<size_t>(k)]));
    }
    return out;
}

namespace {

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

HolderEstimate holder_exponent(std::span<const SpectralField> states, const TimeGrid& grid,
                               const FieldNorm& norm, int max_base_points) {
    const int M = grid.steps;
    const int l_max = static_cast<int>(std::floor(std::log2(static_cast<double>(M)))) - 2;
    if (l_max < 3)
        throw std::invalid_argument("holder_exponent: need at least two dyadic lag levels");

    HolderEstimate est;
    for (int l = 2; l <= l_max; ++l) {
        const int lag_steps = M >> l;
        const auto norms = increment_norms(states, lag_steps, norm, max_base_points);
        est.lags.push_back(grid.horizon * std::ldexp(1.0, -l));
        est.medians.push_back(median_of(norms));
    }
    for (double m : est.medians)
        if (!(m > 0.0))
            throw std::invalid_argument("holder_exponent: degenerate (zero-increment) path");
    est.exponent = fit_rate(est.lags, est.medians).slope;
    return est;
}

} // namespace spde
