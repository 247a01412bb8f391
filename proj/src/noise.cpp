#include "spde/noise.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "spde/spectral_ops.hpp"

namespace spde {

namespace {

// (e^x - 1)/x with the x -> 0 limit.
inline double expm1_over(double x) {
    return x == 0.0 ? 1.0 : std::expm1(x) / x;
}

template <typename Path>
Path subsample_impl(const Path& path, int factor) {
    if (factor < 1 || path.grid.steps % factor != 0)
        throw std::invalid_argument("subsample: factor must divide the step count");
    Path out;
    out.grid = TimeGrid(path.grid.horizon, path.grid.steps / factor);
    out.n_modes = path.n_modes;
    out.stream = path.stream;
    out.samples.reserve(static_cast<size_t>(out.grid.steps) + 1);
    for (int k = 0; k <= out.grid.steps; ++k)
        out.samples.push_back(path.samples[static_cast<size_t>(k) * factor]);
    return out;
}

} // namespace

double ou_transition_variance(double rate, double h) {
    return h * expm1_over(-2.0 * rate * h);
}

double ou_marginal_variance(double rate, double t) {
    return t * expm1_over(-2.0 * rate * t);
}

OuPath sample_ou_path(const TimeGrid& grid, int n_modes, const RngStream& stream) {
    OuPath path;
    path.grid = grid;
    path.n_modes = n_modes;
    path.stream = stream;
    const double h = grid.dt();
    const int M = grid.steps;

    path.samples.assign(static_cast<size_t>(M) + 1, SpectralField(n_modes));
    for (int n = 0; n <= n_modes; ++n) {
        const double rate = mode_rate(n);
        const double decay = std::exp(-rate * h);
        const double sigma2 = ou_transition_variance(rate, h);
        const double comp_sd = n == 0 ? std::sqrt(sigma2) : std::sqrt(0.5 * sigma2);
        std::complex<double> state = 0.0;
        for (int k = 0; k < M; ++k) {
            const auto z = rng::normal_pair(stream, static_cast<std::uint32_t>(n),
                                            static_cast<std::uint32_t>(k));
            const std::complex<double> eta =
                n == 0 ? std::complex<double>(comp_sd * z[0], 0.0)
                       : std::complex<double>(comp_sd * z[0], comp_sd * z[1]);
            state = decay * state + eta;
            path.samples[static_cast<size_t>(k) + 1].coeffs[static_cast<size_t>(n)] = state;
        }
    }
    return path;
}

WienerPath sample_wiener_path(const TimeGrid& grid, int n_modes, const RngStream& stream) {
    WienerPath path;
    path.grid = grid;
    path.n_modes = n_modes;
    path.stream = stream;
    const double h = grid.dt();
    const int M = grid.steps;

    path.samples.assign(static_cast<size_t>(M) + 1, SpectralField(n_modes));
    for (int n = 0; n <= n_modes; ++n) {
        const double comp_sd = n == 0 ? std::sqrt(h) : std::sqrt(0.5 * h);
        std::complex<double> state = 0.0;
        for (int k = 0; k < M; ++k) {
            const auto z = rng::normal_pair(stream, static_cast<std::uint32_t>(n),
                                            static_cast<std::uint32_t>(k));
            state += n == 0 ? std::complex<double>(comp_sd * z[0], 0.0)
                            : std::complex<double>(comp_sd * z[0], comp_sd * z[1]);
            path.samples[static_cast<size_t>(k) + 1].coeffs[static_cast<size_t>(n)] = state;
        }
    }
    return path;
}

OuPath subsample(const OuPath& path, int factor) { return subsample_impl(path, factor); }
WienerPath subsample(const WienerPath& path, int factor) { return subsample_impl(path, factor); }

OuPath project_modes(const OuPath& path, int n_target) {
    if (n_target > path.n_modes)
        throw std::invalid_argument("project_modes: cannot widen a sampled path");
    OuPath out;
    out.grid = path.grid;
    out.n_modes = n_target;
    out.stream = path.stream;
    out.samples.reserve(path.samples.size());
    for (const auto& s : path.samples) out.samples.push_back(project(s, n_target));
    return out;
}

JointStepCovariance joint_step_covariance(double c, double rate, double h) {
    JointStepCovariance cov;
    cov.var_solution = h * expm1_over(2.0 * (c - rate) * h);
    cov.var_convolution = ou_transition_variance(rate, h);
    cov.cross = h * expm1_over((c - 2.0 * rate) * h);
    return cov;
}

JointLinearPath sample_joint_linear(const TimeGrid& grid, int n_modes, double c,
                                    const RngStream& stream) {
    JointLinearPath joint;
    joint.grid = grid;
    joint.n_modes = n_modes;
    joint.exact_states.assign(static_cast<size_t>(grid.steps) + 1, SpectralField(n_modes));
    joint.ou.grid = grid;
    joint.ou.n_modes = n_modes;
    joint.ou.stream = stream;
    joint.ou.samples.assign(static_cast<size_t>(grid.steps) + 1, SpectralField(n_modes));

    const double h = grid.dt();
    for (int n = 0; n <= n_modes; ++n) {
        const double rate = mode_rate(n);
        const double prop_u = std::exp((c - rate) * h);
        const double prop_o = std::exp(-rate * h);
        const auto cov = joint_step_covariance(c, rate, h);

        // Cholesky of [[V1, C], [C, V2]]; V2 - C^2/V1 >= 0 by Cauchy-Schwarz.
        // At c = 0 the two chains are the same stochastic integral
        // (correlation exactly one, equal marginals), so the innovations are
        // reused rather than refactored through roundoff.
        const bool degenerate =
            cov.var_solution == cov.var_convolution && cov.cross == cov.var_convolution &&
            prop_u == prop_o;
        const double l11 = std::sqrt(cov.var_solution);
        const double l21 = degenerate ? l11 : (l11 > 0.0 ? cov.cross / l11 : 0.0);
        const double l22 =
            degenerate ? 0.0 : std::sqrt(std::max(0.0, cov.var_convolution - l21 * l21));
        const double comp = n == 0 ? 1.0 : std::sqrt(0.5);
        const double a11 = comp * l11;
        const double a21 = comp * l21;
        const double a22 = comp * l22;

        std::complex<double> u = 0.0, o = 0.0;
        for (int k = 0; k < grid.steps; ++k) {
            const auto za = rng::normal_pair(stream, static_cast<std::uint32_t>(n),
                                             static_cast<std::uint32_t>(k), 0);
            std::complex<double> i1, i2;
            if (n == 0) {
                i1 = a11 * za[0];
                i2 = a21 * za[0] + a22 * za[1];
            } else {
                const auto zb = rng::normal_pair(stream, static_cast<std::uint32_t>(n),
                                                 static_cast<std::uint32_t>(k), 1);
                i1 = std::complex<double>(a11 * za[0], a11 * zb[0]);
                i2 = std::complex<double>(a21 * za[0] + a22 * za[1],
                                          a21 * zb[0] + a22 * zb[1]);
            }
            u = prop_u * u + i1;
            o = prop_o * o + i2;
            joint.exact_states[static_cast<size_t>(k) + 1].coeffs[static_cast<size_t>(n)] = u;
            joint.ou.samples[static_cast<size_t>(k) + 1].coeffs[static_cast<size_t>(n)] = o;
        }
    }
    return joint;
}

namespace {

constexpr char kMagic[8] = {'S', 'P', 'D', 'E', 'O', 'U', '0', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("ou path load: truncated stream");
    return v;
}

} // namespace

void save_ou_path(const OuPath& path, std::ostream& out) {
    out.write(kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(out, 1u);
    write_pod<std::int32_t>(out, path.n_modes);
    write_pod<std::int32_t>(out, path.grid.steps);
    write_pod<double>(out, path.grid.horizon);
    write_pod<std::uint64_t>(out, path.stream.base_seed);
    write_pod<std::uint64_t>(out, path.stream.stream_id);
    for (int n = 0; n <= path.n_modes; ++n)
        for (int k = 0; k <= path.grid.steps; ++k) {
            const auto c = path.samples[static_cast<size_t>(k)].at(n);
            write_pod<double>(out, c.real());
            write_pod<double>(out, c.imag());
        }
    if (!out) throw std::runtime_error("ou path save: write failed");
}

OuPath load_ou_path(std::istream& in) {
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("ou path load: bad magic");
    if (read_pod<std::uint32_t>(in) != 1u)
        throw std::runtime_error("ou path load: unsupported version");
    OuPath path;
    path.n_modes = read_pod<std::int32_t>(in);
    const int steps = read_pod<std::int32_t>(in);
    const double T = read_pod<double>(in);
    path.grid = TimeGrid(T, steps);
    path.stream.base_seed = read_pod<std::uint64_t>(in);
    path.stream.stream_id = read_pod<std::uint64_t>(in);
    path.samples.assign(static_cast<size_t>(steps) + 1, SpectralField(path.n_modes));
    for (int n = 0; n <= path.n_modes; ++n)
        for (int k = 0; k <= steps; ++k) {
            const double re = read_pod<double>(in);
            const double im = read_pod<double>(in);
            path.samples[static_cast<size_t>(k)].coeffs[static_cast<size_t>(n)] = {re, im};
        }
    return path;
}

void save_ou_path(const OuPath& path, const std::string& filename) {
    std::ofstream out(filename, std::ios::binary);
    if (!out) throw std::runtime_error("ou path save: cannot open " + filename);
    save_ou_path(path, out);
}

OuPath load_ou_path(const std::string& filename) {
    std::ifstream in(filename, std::ios::binary);
    if (!in) throw std::runtime_error("ou path load: cannot open " + filename);
    return load_ou_path(in);
}

} // namespace spde
