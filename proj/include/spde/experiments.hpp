#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "spde/analysis.hpp"
#include "spde/conditioning.hpp"

namespace spde {

inline constexpr const char* kToolVersion = "0.1.0";

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flat key/value configuration (TOML-style syntax: `key = value` lines,
/// `#` comments, integers, floats, booleans, quoted strings and integer
/// arrays).  Unknown keys are rejected so typos fail loudly.
struct ExperimentConfig {
    // shared
    std::string scheme = "splitting";
    std::string nonlinearity = "allen_cahn";
    double linear_c = 1.0;
    double sin_gain = 1.0;
    std::string u0 = "zero";  // "zero" | "cos" (cos starts from (1/2) cos(2 pi x))
    int oversample = 4;
    double horizon = 1.0;
    std::string norm = "L2";  // "L2" | "Linf"
    int samples = 100;
    std::uint64_t base_seed = 1;
    int threads = 1;

    // temporal axis; full-scale study used N = 16383, ladder to 2^12,
    // reference 2^13, 150 samples -- these defaults are the desk scale.
    int n_modes = 511;
    std::vector<int> m_ladder = {1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
    int m_finest = 2048;

    // spatial axis
    int steps = 1024;
    std::vector<int> n_ladder = {7, 15, 31, 63, 127, 255};
    int n_finest = 1023;

    // regularity diagnostics
    int reg_paths = 20;
    int reg_steps = 4096;
    int reg_modes = 511;

    // optimality floor grid
    std::vector<int> lb_steps = {8, 16, 32, 64, 128, 256};
    std::vector<int> lb_modes = {8, 16, 32, 64, 128, 256};

    // sample-path dump
    int path_steps = 256;
    int path_modes = 127;
    int path_points = 256;

    /// Hash of the canonical serialization; `threads` is an execution knob
    /// and excluded, so artifacts hash identically under any worker count.
    std::uint64_t hash() const;
    Nonlinearity make_reaction() const;
    SpectralField make_u0(int for_modes) const;
    NormKind norm_kind() const;
    SchemeKind scheme_kind() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical serialization back to config syntax (the hashing input; omits
/// the `threads` execution knob).
std::string config_to_text(const ExperimentConfig& cfg);

// Drivers behind the CLI subcommands.  Each writes its artifacts under
// out_dir (created if missing) and returns the computed summary.

RateReport run_temporal_rate(const ExperimentConfig& cfg, const std::string& out_dir);
RateReport run_spatial_rate(const ExperimentConfig& cfg, const std::string& out_dir);

struct RegularityReport {
    HolderEstimate sup_norm;        // pooled over paths, L-infinity increments
    HolderEstimate negative_besov;  // pooled, C^{-1/2} diagnostic norm
};
RegularityReport run_regularity(const ExperimentConfig& cfg, const std::string& out_dir);

std::vector<ConditioningResult> run_lower_bound(const ExperimentConfig& cfg,
                                                const std::string& out_dir);

void run_sample_path(const ExperimentConfig& cfg, const std::string& out_dir);

/// Oracle-backed quick checks (quadrature agreement, flow agreement,
/// zero-reaction exactness, partition of unity, scalar recursion).  Prints
/// one line per check; returns false if any failed.
bool run_selftest(const ExperimentConfig& cfg, std::ostream& out);

} // namespace spde
