#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "spde/experiments.hpp"

namespace {

// Exit codes: 0 success, 1 invariant failure, 2 config error, 3 numeric
// failure (blow-up or conditioning).
constexpr int kExitOk = 0;
constexpr int kExitInvariant = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

spde::ExperimentConfig resolve_config(const Options& opt) {
    spde::ExperimentConfig cfg =
        opt.config_path.empty() ? spde::ExperimentConfig{} : spde::load_config(opt.config_path);
    if (opt.seed_set) cfg.base_seed = opt.seed;
    if (opt.threads > 0) cfg.threads = opt.threads;
    return cfg;
}

void print_report(const spde::RateReport& report) {
    for (const auto& p : report.points)
        std::printf("  resolution %6d  mean_sq %.6e  rms %.6e\n", p.resolution, p.mean_sq_error,
                    p.rms_error);
    if (report.slope_defined)
        std::printf("fitted slope: mean-squared %.4f, rms %.4f (window [%d,%d))\n",
                    report.slope_mean_sq, report.slope_rms, report.fit_begin, report.fit_end);
    else
        std::printf("fitted slope: undefined (errors vanish on the fit window)\n");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Strong-rate experiments for stochastic reaction-diffusion schemes"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--config", opt.config_path, "config file (key = value lines)");
    app.add_option("--out", opt.out_dir, "output directory for artifacts");
    auto* seed_opt = app.add_option("--seed", opt.seed, "override base_seed");
    auto* threads_opt = app.add_option("--threads", opt.threads, "override worker count");

    auto* temporal = app.add_subcommand("temporal-rate", "coupled time-step rate study");
    auto* spatial = app.add_subcommand("spatial-rate", "coupled mode-truncation rate study");
    auto* regularity = app.add_subcommand("regularity", "convolution increment exponents");
    auto* lower = app.add_subcommand("lower-bound", "optimality floor by conditioning");
    auto* sample = app.add_subcommand("sample-path", "dump one trajectory as CSV");
    auto* selftest = app.add_subcommand("selftest", "oracle-backed quick checks");
    for (auto* sub : {temporal, spatial, regularity, lower, sample, selftest})
        sub->fallthrough();

    CLI11_PARSE(app, argc, argv);
    opt.seed_set = seed_opt->count() > 0;
    if (threads_opt->count() == 0) opt.threads = 0;

    try {
        const spde::ExperimentConfig cfg = resolve_config(opt);
        if (temporal->parsed()) {
            print_report(spde::run_temporal_rate(cfg, opt.out_dir));
            std::printf("artifacts: %s/rates.csv, %s/rates.svg\n", opt.out_dir.c_str(),
                        opt.out_dir.c_str());
        } else if (spatial->parsed()) {
            print_report(spde::run_spatial_rate(cfg, opt.out_dir));
            std::printf("artifacts: %s/rates.csv, %s/rates.svg\n", opt.out_dir.c_str(),
                        opt.out_dir.c_str());
        } else if (regularity->parsed()) {
            const auto rep = spde::run_regularity(cfg, opt.out_dir);
            std::printf("increment exponent, sup norm:        %.4f\n", rep.sup_norm.exponent);
            std::printf("increment exponent, C^{-1/2} norm:   %.4f\n",
                        rep.negative_besov.exponent);
            std::printf("artifacts: %s/regularity.csv\n", opt.out_dir.c_str());
        } else if (lower->parsed()) {
            const auto results = spde::run_lower_bound(cfg, opt.out_dir);
            bool all_above = true;
            for (const auto& r : results) {
                std::printf("  M %4d  N %4d  optimal %.6e  floor %.6e\n", r.steps, r.n_modes,
                            r.total_error, r.reference_floor);
                all_above = all_above && r.total_error >= r.reference_floor;
            }
            std::printf("floor holds on the whole grid: %s\n", all_above ? "yes" : "NO");
            std::printf("artifacts: %s/lower_bound.csv, %s/lower_bound_modes.csv\n",
                        opt.out_dir.c_str(), opt.out_dir.c_str());
            if (!all_above) return kExitInvariant;
        } else if (sample->parsed()) {
            spde::run_sample_path(cfg, opt.out_dir);
            std::printf("artifacts: %s/sample_path.csv\n", opt.out_dir.c_str());
        } else if (selftest->parsed()) {
            if (!spde::run_selftest(cfg, std::cout)) return kExitInvariant;
        }
        return kExitOk;
    } catch (const spde::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const spde::blow_up_error& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return kExitNumeric;
    } catch (const spde::study_failure& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return kExitNumeric;
    } catch (const spde::conditioning_error& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInvariant;
    }
}
