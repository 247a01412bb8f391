#include "spde/nonlinearity.hpp"

#include <cmath>
#include <stdexcept>

namespace spde {

Nonlinearity allen_cahn() {
    Nonlinearity nl;
    nl.kind = Nonlinearity::Kind::allen_cahn;
    nl.tag = "allen_cahn";
    nl.eval = [](double x) { return x - x * x * x; };
    nl.deriv = [](double x) { return 1.0 - 3.0 * x * x; };
    nl.one_sided_K = 1.0;
    nl.growth_m = 1;
    nl.poly_degree = 3;
    // z e^t / sqrt(1 + z^2 (e^{2t} - 1)); finite for every z, equilibria 0, +-1.
    nl.exact_flow = [](double h, double z) {
        return z * std::exp(h) / std::sqrt(1.0 + z * z * std::expm1(2.0 * h));
    };
    return nl;
}

Nonlinearity linear(double c) {
    Nonlinearity nl;
    nl.kind = Nonlinearity::Kind::linear;
    nl.tag = "linear";
    nl.eval = [c](double x) { return c * x; };
    nl.deriv = [c](double) { return c; };
    nl.one_sided_K = std::max(c, 1.0);
    nl.growth_m = 0;
    nl.poly_degree = 1;
    nl.exact_flow = [c](double h, double z) { return std::exp(c * h) * z; };
    return nl;
}

Nonlinearity bounded_sin(double gain) {
    Nonlinearity nl;
    nl.kind = Nonlinearity::Kind::bounded_sin;
    nl.tag = "bounded_sin";
    nl.eval = [gain](double x) { return gain * std::sin(x); };
    nl.deriv = [gain](double x) { return gain * std::cos(x); };
    nl.one_sided_K = std::abs(gain);
    nl.growth_m = 0;
    return nl;
}

Nonlinearity zero_reaction() {
    Nonlinearity nl;
    nl.kind = Nonlinearity::Kind::custom;
    nl.tag = "zero";
    nl.eval = [](double) { return 0.0; };
    nl.deriv = [](double) { return 0.0; };
    nl.one_sided_K = 1.0;
    nl.growth_m = 0;
    nl.poly_degree = 1;
    nl.exact_flow = [](double, double z) { return z; };
    return nl;
}

namespace {

// Cash-Karp 5(4) step: returns the 5th-order value, writes the embedded error
// estimate.  Scalar autonomous RHS.
double cash_karp_step(const std::function<double(double)>& f, double y, double h, double& err) {
    const double k1 = f(y);
    const double k2 = f(y + h * (k1 / 5.0));
    const double k3 = f(y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
    const double k4 = f(y + h * (3.0 / 10.0 * k1 - 9.0 / 10.0 * k2 + 6.0 / 5.0 * k3));
    const double k5 = f(y + h * (-11.0 / 54.0 * k1 + 5.0 / 2.0 * k2 - 70.0 / 27.0 * k3 +
                                 35.0 / 27.0 * k4));
    const double k6 = f(y + h * (1631.0 / 55296.0 * k1 + 175.0 / 512.0 * k2 +
                                 575.0 / 13824.0 * k3 + 44275.0 / 110592.0 * k4 +
                                 253.0 / 4096.0 * k5));
    const double y5 = y + h * (37.0 / 378.0 * k1 + 250.0 / 621.0 * k3 + 125.0 / 594.0 * k4 +
                               512.0 / 1771.0 * k6);
    const double y4 = y + h * (2825.0 / 27648.0 * k1 + 18575.0 / 48384.0 * k3 +
                               13525.0 / 55296.0 * k4 + 277.0 / 14336.0 * k5 + 0.25 * k6);
    err = std::abs(y5 - y4);
    return y5;
}

double integrate_flow(const std::function<double(double)>& f, double h, double z) {
    constexpr double tol = 1e-12;
    double t = 0.0;
    double y = z;
    double step = h;
    int guard = 0;
    while (t < h) {
        if (t + step > h) step = h - t;
        double err = 0.0;
        const double cand = cash_karp_step(f, y, step, err);
        if (!std::isfinite(cand))
            throw std::runtime_error("flow: numeric integration diverged (non-finite state)");
        const double scale = tol * (1.0 + std::abs(y));
        if (err <= scale || step <= 1e-14 * h) {
            y = cand;
            t += step;
            if (err > 0.0) step *= std::min(5.0, 0.9 * std::pow(scale / err, 0.2));
        } else {
            step *= std::max(0.1, 0.9 * std::pow(scale / err, 0.25));
        }
        if (++guard > 2000000)
            throw std::runtime_error("flow: adaptive integration failed to advance");
    }
    return y;
}

} // namespace

double flow(const Nonlinearity& nl, double h, double z) {
    if (h < 0.0) throw std::invalid_argument("flow: h must be >= 0");
    if (h == 0.0) return z;
    if (nl.exact_flow) {
        const double v = (*nl.exact_flow)(h, z);
        if (!std::isfinite(v)) throw std::runtime_error("flow: closed form produced non-finite value");
        return v;
    }
    return integrate_flow(nl.eval, h, z);
}

double averaged_drift(const Nonlinearity& nl, double h, double z) {
    if (h < 0.0) throw std::invalid_argument("averaged_drift: h must be >= 0");
    if (h < 1e-8) {
        const double fz = nl.eval(z);
        return h == 0.0 ? fz : fz + 0.5 * h * nl.deriv(z) * fz;
    }
    return (flow(nl, h, z) - z) / h;
}

void validate_assumptions(const Nonlinearity& nl) {
    const double k_slack = nl.one_sided_K + 1e-9;
    for (int i = -320; i <= 320; ++i) {
        const double x = i / 64.0;
        if (nl.deriv(x) > k_slack)
            throw std::logic_error("nonlinearity '" + nl.tag + "': f'(x) exceeds K at x = " +
                                   std::to_string(x));
        const double growth =
            nl.one_sided_K * (1.0 + std::pow(std::abs(x), 2 * nl.growth_m + 1));
        if (std::abs(nl.eval(x)) > growth + 1e-9)
            throw std::logic_error("nonlinearity '" + nl.tag + "': growth bound fails at x = " +
                                   std::to_string(x));
    }
}

} // namespace spde
