#pragma once

#include <functional>
#include <optional>
#include <string>

namespace spde {

/// Reaction term descriptor: f, its derivative, one-sided Lipschitz constant K
/// ((f(x)-f(y))(x-y) <= K (x-y)^2) and polynomial growth exponent m
/// (|f(x)| <= K (1 + |x|^{2m+1})).  `exact_flow`, when present, is the closed
/// form of the ODE flow d/dt Phi = f(Phi), Phi_0 = id.
struct Nonlinearity {
    enum class Kind { allen_cahn, linear, bounded_sin, custom };

    Kind kind = Kind::custom;
    std::string tag;
    std::function<double(double)> eval;
    std::function<double(double)> deriv;
    double one_sided_K = 1.0;
    int growth_m = 0;
    int poly_degree = 0;  // 0 when not polynomial
    std::optional<std::function<double(double, double)>> exact_flow;  // (h, z)
};

/// f(x) = x - x^3 with the closed-form flow z e^t / sqrt(1 + z^2 (e^{2t}-1)).
Nonlinearity allen_cahn();

/// f(x) = c x, flow e^{c h} z.
Nonlinearity linear(double c);

/// f(x) = gain * sin(x); bounded with bounded derivatives, no closed flow.
Nonlinearity bounded_sin(double gain);

/// f identically zero (flow is the identity).
Nonlinearity zero_reaction();

/// Phi_h(z): exact flow when available, otherwise an adaptive embedded RK
/// integration with local tolerance 1e-12.  Throws std::runtime_error on a
/// non-finite intermediate (misconfigured custom nonlinearity).
double flow(const Nonlinearity& nl, double h, double z);

/// Averaged drift g_h(z) = (Phi_h(z) - z)/h, with g_0 = f; tiny h switches to
/// the expansion f(z) + (h/2) f'(z) f(z) to dodge cancellation.
double averaged_drift(const Nonlinearity& nl, double h, double z);

/// Spot-checks the declared one-sided Lipschitz and growth bounds on a dense
/// lattice z in [-5, 5]; throws std::logic_error naming the first violation.
void validate_assumptions(const Nonlinearity& nl);

} // namespace spde
