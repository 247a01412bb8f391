#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spde/noise.hpp"
#include "spde/nonlinearity.hpp"
#include "spde/spectral_field.hpp"

namespace spde {

enum class SchemeKind { exp_euler, splitting, wiener_baseline };

std::string scheme_name(SchemeKind kind);

struct Trajectory {
    TimeGrid grid;
    int n_modes = 0;
    SchemeKind scheme = SchemeKind::exp_euler;
    std::string nonlinearity_tag;
    std::vector<SpectralField> states;  // one per grid point
};

struct SchemeConfig {
    int n_modes = 0;
    TimeGrid grid;
    SpectralField u0;      // empty -> zero start
    Nonlinearity reaction; // f
    int oversample = 4;

    SpectralField initial_state() const;
};

/// Raised when a time stepper produces a non-finite state; carries the step
/// at which it happened (expected possibility for superlinear reactions under
/// schemes without a priori bounds).
struct blow_up_error : std::runtime_error {
    int step;
    explicit blow_up_error(int step_);
};

/// Invoked after every accepted step with (step index, state at t_k); index 0
/// delivers the initial state.  Lets long runs stream instead of storing.
using StateObserver = std::function<void(int, const SpectralField&)>;

/// One step of the integrated-propagator scheme:
///   V_{k+1} = P_h V_k + (int_0^h P_s ds) Pi_N f(V_k) + [O_{k+1} - P_h O_k].
/// The noise term is evaluated mode-wise from the sampled convolution.
void run_exponential_euler(const SchemeConfig& cfg, const OuPath& noise,
                           const StateObserver& observe);
Trajectory run_exponential_euler(const SchemeConfig& cfg, const OuPath& noise);

/// Reaction flow / linear-stochastic alternation:
///   X_{k+1} = P_h Pi_N Phi_h(X_k) + [O_{k+1} - P_h O_k],
/// with Phi_h applied pointwise on the dealiasing grid.  Stable for one-sided
/// Lipschitz reactions of any polynomial growth.
void run_splitting(const SchemeConfig& cfg, const OuPath& noise,
                   const StateObserver& observe);
Trajectory run_splitting(const SchemeConfig& cfg, const OuPath& noise);

/// Same recursion written through the averaged drift,
///   X_{k+1} = P_h X_k + h P_h g_h(X_k) + noise;
/// algebraically identical to run_splitting, kept as a cross-check route.
Trajectory run_splitting_averaged(const SchemeConfig& cfg, const OuPath& noise);

/// Baseline consuming only Wiener increments:
///   V_{k+1} = P_h (V_k + h Pi_N f(V_k)) + P_h (W_{k+1} - W_k).
/// Use with bounded reactions; superlinear ones can blow up.
void run_wiener_baseline(const SchemeConfig& cfg, const WienerPath& noise,
                         const StateObserver& observe);
Trajectory run_wiener_baseline(const SchemeConfig& cfg, const WienerPath& noise);

} // namespace spde
