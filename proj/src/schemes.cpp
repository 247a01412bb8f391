#include "spde/schemes.hpp"

#include <cmath>

#include "spde/spectral_ops.hpp"

namespace spde {

std::string scheme_name(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::exp_euler: return "exp_euler";
        case SchemeKind::splitting: return "splitting";
        case SchemeKind::wiener_baseline: return "wiener_baseline";
    }
    return "?";
}

SpectralField SchemeConfig::initial_state() const {
    if (u0.coeffs.empty()) return SpectralField::zero(n_modes);
    return project(u0, n_modes);
}

blow_up_error::blow_up_error(int step_)
    : std::runtime_error("scheme blow-up: non-finite state at step " + std::to_string(step_)),
      step(step_) {}

namespace {

struct StepWeights {
    std::vector<double> decay;          // e^{-lambda_n h}
    std::vector<double> drift_weight;   // int_0^h e^{-lambda_n s} ds

    StepWeights(int n_modes, double h)
        : decay(static_cast<size_t>(n_modes) + 1), drift_weight(decay.size()) {
        for (int n = 0; n <= n_modes; ++n) {
            decay[static_cast<size_t>(n)] = std::exp(-mode_rate(n) * h);
            drift_weight[static_cast<size_t>(n)] = heat_integral_multiplier(n, h);
        }
    }
};

void check_noise_compat(const SchemeConfig& cfg, const TimeGrid& noise_grid, int noise_modes) {
    if (!(noise_grid == cfg.grid))
        throw std::invalid_argument("scheme: noise grid does not match config grid");
    if (noise_modes < cfg.n_modes)
        throw std::invalid_argument("scheme: noise path carries fewer modes than the scheme");
}

template <typename Step>
void drive(const SchemeConfig& cfg, const StateObserver& observe, const Step& step) {
    SpectralField state = cfg.initial_state();
    if (observe) observe(0, state);
    for (int k = 0; k < cfg.grid.steps; ++k) {
        try {
            state = step(k, state);
        } catch (const nonfinite_value_error&) {
            // reaction overflowed pointwise before the state itself did
            throw blow_up_error(k + 1);
        }
        if (!state.all_finite()) throw blow_up_error(k + 1);
        if (observe) observe(k + 1, state);
    }
}

Trajectory collect(const SchemeConfig& cfg, SchemeKind kind,
                   const std::function<void(const StateObserver&)>& runner) {
    Trajectory traj;
    traj.grid = cfg.grid;
    traj.n_modes = cfg.n_modes;
    traj.scheme = kind;
    traj.nonlinearity_tag = cfg.reaction.tag;
    traj.states.reserve(static_cast<size_t>(cfg.grid.steps) + 1);
    runner([&traj](int, const SpectralField& s) { traj.states.push_back(s); });
    return traj;
}

} // namespace

void run_exponential_euler(const SchemeConfig& cfg, const OuPath& noise,
                           const StateObserver& observe) {
    check_noise_compat(cfg, noise.grid, noise.n_modes);
    const StepWeights w(cfg.n_modes, cfg.grid.dt());
    drive(cfg, observe, [&](int k, const SpectralField& state) {
        SpectralField drift = apply_pointwise(state, cfg.reaction.eval, cfg.oversample,
                                              cfg.reaction.poly_degree);
        // Grouped as decay*(V - O_k) + O_{k+1} so a state that coincides with
        // the sampled convolution stays on it bit-for-bit.
        SpectralField next(cfg.n_modes);
        for (int n = 0; n <= cfg.n_modes; ++n) {
            const size_t i = static_cast<size_t>(n);
            next.coeffs[i] =
                w.decay[i] * (state.coeffs[i] - noise.samples[static_cast<size_t>(k)].at(n)) +
                w.drift_weight[i] * drift.coeffs[i] +
                noise.samples[static_cast<size_t>(k) + 1].at(n);
        }
        return next;
    });
}

Trajectory run_exponential_euler(const SchemeConfig& cfg, const OuPath& noise) {
    return collect(cfg, SchemeKind::exp_euler,
                   [&](const StateObserver& o) { run_exponential_euler(cfg, noise, o); });
}

void run_splitting(const SchemeConfig& cfg, const OuPath& noise, const StateObserver& observe) {
    check_noise_compat(cfg, noise.grid, noise.n_modes);
    const double h = cfg.grid.dt();
    const StepWeights w(cfg.n_modes, h);
    const auto& nl = cfg.reaction;
    drive(cfg, observe, [&](int k, const SpectralField& state) {
        // Pi_N Phi_h(X) evaluated as X + Pi_N(Phi_h(X) - X): the band-limited
        // part does not re-round through the transform pair.
        SpectralField deviation = apply_pointwise(
            state, [&](double z) { return flow(nl, h, z) - z; }, cfg.oversample);
        SpectralField next(cfg.n_modes);
        for (int n = 0; n <= cfg.n_modes; ++n) {
            const size_t i = static_cast<size_t>(n);
            next.coeffs[i] =
                w.decay[i] * (state.coeffs[i] + deviation.coeffs[i] -
                              noise.samples[static_cast<size_t>(k)].at(n)) +
                noise.samples[static_cast<size_t>(k) + 1].at(n);
        }
        return next;
    });
}

Trajectory run_splitting(const SchemeConfig& cfg, const OuPath& noise) {
    return collect(cfg, SchemeKind::splitting,
                   [&](const StateObserver& o) { run_splitting(cfg, noise, o); });
}

Trajectory run_splitting_averaged(const SchemeConfig& cfg, const OuPath& noise) {
    check_noise_compat(cfg, noise.grid, noise.n_modes);
    const double h = cfg.grid.dt();
    const StepWeights w(cfg.n_modes, h);
    const auto& nl = cfg.reaction;
    return collect(cfg, SchemeKind::splitting, [&](const StateObserver& o) {
        drive(cfg, o, [&](int k, const SpectralField& state) {
            SpectralField drift = apply_pointwise(
                state, [&](double z) { return averaged_drift(nl, h, z); }, cfg.oversample);
            SpectralField next(cfg.n_modes);
            for (int n = 0; n <= cfg.n_modes; ++n) {
                const size_t i = static_cast<size_t>(n);
                next.coeffs[i] =
                    w.decay[i] * (state.coeffs[i] + h * drift.coeffs[i]) +
                    (noise.samples[static_cast<size_t>(k) + 1].at(n) -
                     w.decay[i] * noise.samples[static_cast<size_t>(k)].at(n));
            }
            return next;
        });
    });
}

void run_wiener_baseline(const SchemeConfig& cfg, const WienerPath& noise,
                         const StateObserver& observe) {
    check_noise_compat(cfg, noise.grid, noise.n_modes);
    const double h = cfg.grid.dt();
    const StepWeights w(cfg.n_modes, h);
    drive(cfg, observe, [&](int k, const SpectralField& state) {
        SpectralField drift = apply_pointwise(state, cfg.reaction.eval, cfg.oversample,
                                              cfg.reaction.poly_degree);
        SpectralField next(cfg.n_modes);
        for (int n = 0; n <= cfg.n_modes; ++n) {
            const size_t i = static_cast<size_t>(n);
            const auto dW = noise.samples[static_cast<size_t>(k) + 1].at(n) -
                            noise.samples[static_cast<size_t>(k)].at(n);
            next.coeffs[i] = w.decay[i] * (state.coeffs[i] + h * drift.coeffs[i] + dW);
        }
        return next;
    });
}

Trajectory run_wiener_baseline(const SchemeConfig& cfg, const WienerPath& noise) {
    return collect(cfg, SchemeKind::wiener_baseline,
                   [&](const StateObserver& o) { run_wiener_baseline(cfg, noise, o); });
}

} // namespace spde
