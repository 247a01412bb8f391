#include "spde/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "spde/fft.hpp"
#include "spde/quadrature.hpp"

namespace spde {

namespace {

// --------------------------------------------------------------------------
// Config parsing: `key = value` lines, # comments, ints, floats, bools,
// quoted strings, [int, ...] arrays.
// --------------------------------------------------------------------------

using ConfigValue = std::variant<long long, double, bool, std::string, std::vector<long long>>;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

ConfigValue parse_scalar(const std::string& raw, int line_no) {
    const std::string v = trim(raw);
    if (v.empty()) throw config_error("config line " + std::to_string(line_no) + ": empty value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw config_error("config line " + std::to_string(line_no) + ": unterminated string");
        return v.substr(1, v.size() - 2);
    }
    if (v == "true") return true;
    if (v == "false") return false;
    try {
        size_t used = 0;
        if (v.find_first_of(".eE") == std::string::npos) {
            const long long i = std::stoll(v, &used);
            if (used == v.size()) return i;
        }
        const double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {
    }
    throw config_error("config line " + std::to_string(line_no) + ": cannot parse value '" + v +
                       "'");
}

std::map<std::string, ConfigValue> parse_kv(const std::string& text) {
    std::map<std::string, ConfigValue> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        bool in_string = false;
        for (size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') {
                in_string = !in_string;
            } else if (line[i] == '#' && !in_string) {
                line = line.substr(0, i);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw config_error("config line " + std::to_string(line_no) + ": missing key");
        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']')
                throw config_error("config line " + std::to_string(line_no) +
                                   ": unterminated array");
            std::vector<long long> items;
            std::string body = value.substr(1, value.size() - 2);
            std::istringstream items_in(body);
            std::string item;
            while (std::getline(items_in, item, ',')) {
                item = trim(item);
                if (item.empty()) continue;
                items.push_back(std::get<long long>(parse_scalar(item, line_no)));
            }
            kv[key] = std::move(items);
        } else {
            kv[key] = parse_scalar(value, line_no);
        }
    }
    return kv;
}

long long want_int(const std::string& key, const ConfigValue& v) {
    if (const auto* i = std::get_if<long long>(&v)) return *i;
    throw config_error("config key '" + key + "': expected an integer");
}

double want_double(const std::string& key, const ConfigValue& v) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<long long>(&v)) return static_cast<double>(*i);
    throw config_error("config key '" + key + "': expected a number");
}

std::string want_string(const std::string& key, const ConfigValue& v) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw config_error("config key '" + key + "': expected a quoted string");
}

std::vector<int> want_ints(const std::string& key, const ConfigValue& v) {
    if (const auto* a = std::get_if<std::vector<long long>>(&v)) {
        std::vector<int> out;
        out.reserve(a->size());
        for (long long x : *a) out.push_back(static_cast<int>(x));
        return out;
    }
    throw config_error("config key '" + key + "': expected an integer array");
}

// --------------------------------------------------------------------------
// Deterministic text formatting for emitted artifacts
// --------------------------------------------------------------------------

std::string fmt_g(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt_f2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string ints_to_text(const std::vector<int>& v) {
    std::string out = "[";
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(v[i]);
    }
    return out + "]";
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::ofstream open_artifact(const std::string& out_dir, const std::string& name) {
    std::filesystem::create_directories(out_dir);
    const auto path = std::filesystem::path(out_dir) / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_header(std::ostream& out, const ExperimentConfig& cfg, const char* comment_open,
                  const char* comment_close) {
    char hash_buf[32];
    std::snprintf(hash_buf, sizeof hash_buf, "%016llx",
                  static_cast<unsigned long long>(cfg.hash()));
    out << comment_open << " spde-rates " << kToolVersion << comment_close << "\n";
    out << comment_open << " config_hash=" << hash_buf << " seed=" << cfg.base_seed
        << comment_close << "\n";
    out << comment_open
        << " domain: unit torus R/Z; sup norms are oversampled-grid maxima" << comment_close
        << "\n";
}

} // namespace

std::uint64_t ExperimentConfig::hash() const {
    return fnv1a(config_to_text(*this));
}

Nonlinearity ExperimentConfig::make_reaction() const {
    if (nonlinearity == "allen_cahn") return allen_cahn();
    if (nonlinearity == "linear") return linear(linear_c);
    if (nonlinearity == "bounded_sin") return bounded_sin(sin_gain);
    if (nonlinearity == "zero") return zero_reaction();
    throw config_error("unknown nonlinearity '" + nonlinearity + "'");
}

SpectralField ExperimentConfig::make_u0(int for_modes) const {
    if (u0 == "zero") return {};
    if (u0 == "cos") {
        if (for_modes < 1) throw config_error("u0 = \"cos\" needs at least one mode");
        return SpectralField::mode(1, 0.25, for_modes);  // (1/2) cos(2 pi x)
    }
    throw config_error("unknown u0 '" + u0 + "' (use \"zero\" or \"cos\")");
}

NormKind ExperimentConfig::norm_kind() const {
    if (norm == "L2") return NormKind::L2;
    if (norm == "Linf") return NormKind::Linf;
    throw config_error("unknown norm '" + norm + "' (use \"L2\" or \"Linf\")");
}

SchemeKind ExperimentConfig::scheme_kind() const {
    if (scheme == "exp_euler") return SchemeKind::exp_euler;
    if (scheme == "splitting") return SchemeKind::splitting;
    if (scheme == "wiener_baseline") return SchemeKind::wiener_baseline;
    throw config_error("unknown scheme '" + scheme + "'");
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    const auto kv = parse_kv(text);

    const std::map<std::string, std::function<void(const ConfigValue&)>> setters = {
        {"scheme", [&](const ConfigValue& v) { cfg.scheme = want_string("scheme", v); }},
        {"nonlinearity",
         [&](const ConfigValue& v) { cfg.nonlinearity = want_string("nonlinearity", v); }},
        {"linear_c", [&](const ConfigValue& v) { cfg.linear_c = want_double("linear_c", v); }},
        {"sin_gain", [&](const ConfigValue& v) { cfg.sin_gain = want_double("sin_gain", v); }},
        {"u0", [&](const ConfigValue& v) { cfg.u0 = want_string("u0", v); }},
        {"oversample",
         [&](const ConfigValue& v) { cfg.oversample = static_cast<int>(want_int("oversample", v)); }},
        {"T", [&](const ConfigValue& v) { cfg.horizon = want_double("T", v); }},
        {"norm", [&](const ConfigValue& v) { cfg.norm = want_string("norm", v); }},
        {"samples",
         [&](const ConfigValue& v) { cfg.samples = static_cast<int>(want_int("samples", v)); }},
        {"base_seed",
         [&](const ConfigValue& v) {
             cfg.base_seed = static_cast<std::uint64_t>(want_int("base_seed", v));
         }},
        {"threads",
         [&](const ConfigValue& v) { cfg.threads = static_cast<int>(want_int("threads", v)); }},
        {"N", [&](const ConfigValue& v) { cfg.n_modes = static_cast<int>(want_int("N", v)); }},
        {"M_ladder", [&](const ConfigValue& v) { cfg.m_ladder = want_ints("M_ladder", v); }},
        {"M_finest",
         [&](const ConfigValue& v) { cfg.m_finest = static_cast<int>(want_int("M_finest", v)); }},
        {"M", [&](const ConfigValue& v) { cfg.steps = static_cast<int>(want_int("M", v)); }},
        {"N_ladder", [&](const ConfigValue& v) { cfg.n_ladder = want_ints("N_ladder", v); }},
        {"N_finest",
         [&](const ConfigValue& v) { cfg.n_finest = static_cast<int>(want_int("N_finest", v)); }},
        {"reg_paths",
         [&](const ConfigValue& v) { cfg.reg_paths = static_cast<int>(want_int("reg_paths", v)); }},
        {"reg_M",
         [&](const ConfigValue& v) { cfg.reg_steps = static_cast<int>(want_int("reg_M", v)); }},
        {"reg_N",
         [&](const ConfigValue& v) { cfg.reg_modes = static_cast<int>(want_int("reg_N", v)); }},
        {"lb_M", [&](const ConfigValue& v) { cfg.lb_steps = want_ints("lb_M", v); }},
        {"lb_N", [&](const ConfigValue& v) { cfg.lb_modes = want_ints("lb_N", v); }},
        {"path_M",
         [&](const ConfigValue& v) { cfg.path_steps = static_cast<int>(want_int("path_M", v)); }},
        {"path_N",
         [&](const ConfigValue& v) { cfg.path_modes = static_cast<int>(want_int("path_N", v)); }},
        {"path_points",
         [&](const ConfigValue& v) {
             cfg.path_points = static_cast<int>(want_int("path_points", v));
         }},
    };

    for (const auto& [key, value] : kv) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw config_error("unknown config key '" + key + "'");
        it->second(value);
    }

    if (cfg.samples < 1) throw config_error("samples must be >= 1");
    if (cfg.threads < 1) throw config_error("threads must be >= 1");
    if (!(cfg.horizon > 0.0)) throw config_error("T must be positive");
    cfg.make_reaction();
    cfg.norm_kind();
    cfg.scheme_kind();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_to_text(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "scheme = \"" << cfg.scheme << "\"\n";
    out << "nonlinearity = \"" << cfg.nonlinearity << "\"\n";
    out << "linear_c = " << fmt_g(cfg.linear_c) << "\n";
    out << "sin_gain = " << fmt_g(cfg.sin_gain) << "\n";
    out << "u0 = \"" << cfg.u0 << "\"\n";
    out << "oversample = " << cfg.oversample << "\n";
    out << "T = " << fmt_g(cfg.horizon) << "\n";
    out << "norm = \"" << cfg.norm << "\"\n";
    out << "samples = " << cfg.samples << "\n";
    out << "base_seed = " << cfg.base_seed << "\n";
    out << "N = " << cfg.n_modes << "\n";
    out << "M_ladder = " << ints_to_text(cfg.m_ladder) << "\n";
    out << "M_finest = " << cfg.m_finest << "\n";
    out << "M = " << cfg.steps << "\n";
    out << "N_ladder = " << ints_to_text(cfg.n_ladder) << "\n";
    out << "N_finest = " << cfg.n_finest << "\n";
    out << "reg_paths = " << cfg.reg_paths << "\n";
    out << "reg_M = " << cfg.reg_steps << "\n";
    out << "reg_N = " << cfg.reg_modes << "\n";
    out << "lb_M = " << ints_to_text(cfg.lb_steps) << "\n";
    out << "lb_N = " << ints_to_text(cfg.lb_modes) << "\n";
    out << "path_M = " << cfg.path_steps << "\n";
    out << "path_N = " << cfg.path_modes << "\n";
    out << "path_points = " << cfg.path_points << "\n";
    return out.str();
}

// --------------------------------------------------------------------------
// Artifact writers
// --------------------------------------------------------------------------

namespace {

void write_rates_csv(const ExperimentConfig& cfg, const RateReport& report,
                     const std::string& out_dir) {
    auto out = open_artifact(out_dir, "rates.csv");
    write_header(out, cfg, "#", "");
    out << "resolution,n_samples,mean_sq_error,std_err,rms_error\n";
    for (const auto& p : report.points)
        out << p.resolution << "," << p.n_samples << "," << fmt_g(p.mean_sq_error) << ","
            << fmt_g(p.std_err) << "," << fmt_g(p.rms_error) << "\n";
    if (report.slope_defined) {
        out << "# fit window: points [" << report.fit_begin << "," << report.fit_end << ")\n";
        out << "# slope_mean_sq=" << fmt_g(report.slope_mean_sq)
            << " slope_rms=" << fmt_g(report.slope_rms)
            << " intercept=" << fmt_g(report.intercept) << " residual=" << fmt_g(report.residual)
            << "\n";
    } else {
        out << "# slope undefined (errors vanish on the fit window)\n";
    }
}

void write_rates_svg(const ExperimentConfig& cfg, const RateReport& report,
                     const std::string& out_dir, const std::string& x_label) {
    auto out = open_artifact(out_dir, "rates.svg");
    const int width = 640, height = 460;
    const double ml = 70, mr = 25, mt = 40, mb = 55;

    std::vector<double> xs, ys;
    for (const auto& p : report.points)
        if (p.mean_sq_error > 0.0) {
            xs.push_back(std::log2(static_cast<double>(p.resolution)));
            ys.push_back(std::log2(p.mean_sq_error));
        }

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    write_header(out, cfg, "<!--", " -->");
    out << "<rect width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\" stroke=\"none\"/>\n";

    if (xs.empty()) {
        out << "<text x=\"40\" y=\"60\" font-family=\"monospace\" font-size=\"14\">"
               "all errors are exactly zero; nothing to plot</text>\n</svg>\n";
        return;
    }

    double x_lo = *std::min_element(xs.begin(), xs.end());
    double x_hi = *std::max_element(xs.begin(), xs.end());
    double y_lo = *std::min_element(ys.begin(), ys.end());
    double y_hi = *std::max_element(ys.begin(), ys.end());
    if (x_hi == x_lo) x_hi = x_lo + 1;
    if (y_hi == y_lo) y_hi = y_lo + 1;
    const double xpad = 0.05 * (x_hi - x_lo), ypad = 0.08 * (y_hi - y_lo);
    x_lo -= xpad; x_hi += xpad; y_lo -= ypad; y_hi += ypad;

    const auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (width - ml - mr); };
    const auto py = [&](double y) {
        return height - mb - (y - y_lo) / (y_hi - y_lo) * (height - mt - mb);
    };

    out << "<rect x=\"" << fmt_f2(ml) << "\" y=\"" << fmt_f2(mt) << "\" width=\""
        << fmt_f2(width - ml - mr) << "\" height=\"" << fmt_f2(height - mt - mb)
        << "\" fill=\"none\" stroke=\"black\"/>\n";

    const int x_tick = std::max(1, static_cast<int>((x_hi - x_lo) / 10) + 1);
    for (int t = static_cast<int>(std::ceil(x_lo)); t <= static_cast<int>(std::floor(x_hi));
         t += x_tick) {
        out << "<line x1=\"" << fmt_f2(px(t)) << "\" y1=\"" << fmt_f2(height - mb) << "\" x2=\""
            << fmt_f2(px(t)) << "\" y2=\"" << fmt_f2(height - mb + 5)
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt_f2(px(t)) << "\" y=\"" << fmt_f2(height - mb + 20)
            << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">" << t
            << "</text>\n";
    }
    const int y_tick = std::max(1, static_cast<int>((y_hi - y_lo) / 8) + 1);
    for (int t = static_cast<int>(std::ceil(y_lo)); t <= static_cast<int>(std::floor(y_hi));
         t += y_tick) {
        out << "<line x1=\"" << fmt_f2(ml - 5) << "\" y1=\"" << fmt_f2(py(t)) << "\" x2=\""
            << fmt_f2(ml) << "\" y2=\"" << fmt_f2(py(t)) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt_f2(ml - 9) << "\" y=\"" << fmt_f2(py(t) + 4)
            << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">" << t
            << "</text>\n";
    }
    out << "<text x=\"" << fmt_f2(ml + (width - ml - mr) / 2) << "\" y=\""
        << fmt_f2(height - 12.0)
        << "\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\">" << x_label
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << fmt_f2(mt + (height - mt - mb) / 2)
        << "\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 16 "
        << fmt_f2(mt + (height - mt - mb) / 2) << ")\">log2 mean squared error</text>\n";

    // polyline through the measured points
    out << "<polyline fill=\"none\" stroke=\"#888888\" stroke-width=\"1\" points=\"";
    for (size_t i = 0; i < xs.size(); ++i)
        out << fmt_f2(px(xs[i])) << "," << fmt_f2(py(ys[i])) << " ";
    out << "\"/>\n";
    for (size_t i = 0; i < xs.size(); ++i)
        out << "<circle cx=\"" << fmt_f2(px(xs[i])) << "\" cy=\"" << fmt_f2(py(ys[i]))
            << "\" r=\"3\" fill=\"#1f4e9c\"/>\n";

    if (report.slope_defined) {
        const double fx0 =
            std::log2(static_cast<double>(report.points[report.fit_begin].resolution));
        const double fx1 =
            std::log2(static_cast<double>(report.points[report.fit_end - 1].resolution));
        const double fy0 = report.intercept + report.slope_mean_sq * fx0;
        const double fy1 = report.intercept + report.slope_mean_sq * fx1;
        out << "<line x1=\"" << fmt_f2(px(fx0)) << "\" y1=\"" << fmt_f2(py(fy0)) << "\" x2=\""
            << fmt_f2(px(fx1)) << "\" y2=\"" << fmt_f2(py(fy1))
            << "\" stroke=\"#c03020\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fmt_f2(width - mr - 8) << "\" y=\"" << fmt_f2(mt + 18.0)
            << "\" font-family=\"monospace\" font-size=\"14\" text-anchor=\"end\">slope = "
            << fmt_g(report.slope_mean_sq) << " (rms " << fmt_g(report.slope_rms)
            << ")</text>\n";
    }
    out << "</svg>\n";
}

StudyConfig study_from(const ExperimentConfig& cfg, StudyAxis axis) {
    StudyConfig sc;
    sc.scheme = cfg.scheme_kind();
    sc.reaction = cfg.make_reaction();
    sc.horizon = cfg.horizon;
    sc.oversample = cfg.oversample;
    sc.norm = cfg.norm_kind();
    sc.axis = axis;
    sc.n_samples = cfg.samples;
    sc.base_seed = cfg.base_seed;
    sc.threads = cfg.threads;
    if (axis == StudyAxis::temporal) {
        sc.n_modes = cfg.n_modes;
        sc.resolutions = cfg.m_ladder;
        sc.finest = cfg.m_finest;
        sc.u0 = cfg.make_u0(cfg.n_modes);
    } else {
        sc.steps = cfg.steps;
        sc.resolutions = cfg.n_ladder;
        sc.finest = cfg.n_finest;
        sc.u0 = cfg.make_u0(cfg.n_finest);
    }
    return sc;
}

} // namespace

RateReport run_temporal_rate(const ExperimentConfig& cfg, const std::string& out_dir) {
    const RateReport report = convergence_study(study_from(cfg, StudyAxis::temporal));
    write_rates_csv(cfg, report, out_dir);
    write_rates_svg(cfg, report, out_dir, "log2 M (time steps)");
    return report;
}

RateReport run_spatial_rate(const ExperimentConfig& cfg, const std::string& out_dir) {
    const RateReport report = convergence_study(study_from(cfg, StudyAxis::spatial));
    write_rates_csv(cfg, report, out_dir);
    write_rates_svg(cfg, report, out_dir, "log2 N (spatial modes)");
    return report;
}

namespace {

double median_of_sorted_copy(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

RegularityReport run_regularity(const ExperimentConfig& cfg, const std::string& out_dir) {
    const TimeGrid grid(cfg.horizon, cfg.reg_steps);
    const int l_max = static_cast<int>(std::floor(std::log2(static_cast<double>(cfg.reg_steps)))) - 2;
    if (l_max < 3) throw config_error("regularity: reg_M too small for a dyadic lag ladder");

    const FieldNorm sup_norm = make_linf_norm();
    const FieldNorm besov = make_besov_field_norm(BesovSpec{-0.5, kInf, kInf, {}});

    std::vector<std::vector<double>> pooled_sup(static_cast<size_t>(l_max - 1));
    std::vector<std::vector<double>> pooled_besov(static_cast<size_t>(l_max - 1));
    for (int path_idx = 0; path_idx < cfg.reg_paths; ++path_idx) {
        const OuPath path = sample_ou_path(grid, cfg.reg_modes,
                                           {cfg.base_seed, static_cast<std::uint64_t>(path_idx)});
        for (int l = 2; l <= l_max; ++l) {
            const int lag_steps = cfg.reg_steps >> l;
            auto a = increment_norms(path.samples, lag_steps, sup_norm);
            auto b = increment_norms(path.samples, lag_steps, besov);
            auto& sa = pooled_sup[static_cast<size_t>(l - 2)];
            auto& sb = pooled_besov[static_cast<size_t>(l - 2)];
            sa.insert(sa.end(), a.begin(), a.end());
            sb.insert(sb.end(), b.begin(), b.end());
        }
    }

    RegularityReport report;
    for (int l = 2; l <= l_max; ++l) {
        const double lag = cfg.horizon * std::ldexp(1.0, -l);
        report.sup_norm.lags.push_back(lag);
        report.negative_besov.lags.push_back(lag);
        report.sup_norm.medians.push_back(
            median_of_sorted_copy(pooled_sup[static_cast<size_t>(l - 2)]));
        report.negative_besov.medians.push_back(
            median_of_sorted_copy(pooled_besov[static_cast<size_t>(l - 2)]));
    }
    report.sup_norm.exponent = fit_rate(report.sup_norm.lags, report.sup_norm.medians).slope;
    report.negative_besov.exponent =
        fit_rate(report.negative_besov.lags, report.negative_besov.medians).slope;

    auto out = open_artifact(out_dir, "regularity.csv");
    write_header(out, cfg, "#", "");
    out << "norm,lag,median_increment\n";
    for (size_t i = 0; i < report.sup_norm.lags.size(); ++i)
        out << "Linf," << fmt_g(report.sup_norm.lags[i]) << ","
            << fmt_g(report.sup_norm.medians[i]) << "\n";
    for (size_t i = 0; i < report.negative_besov.lags.size(); ++i)
        out << "Cminus12," << fmt_g(report.negative_besov.lags[i]) << ","
            << fmt_g(report.negative_besov.medians[i]) << "\n";
    out << "# exponent_Linf=" << fmt_g(report.sup_norm.exponent) << "\n";
    out << "# exponent_Cminus12=" << fmt_g(report.negative_besov.exponent) << "\n";
    return report;
}

std::vector<ConditioningResult> run_lower_bound(const ExperimentConfig& cfg,
                                                const std::string& out_dir) {
    const auto results = conditioning_grid(cfg.lb_steps, cfg.lb_modes);

    auto out = open_artifact(out_dir, "lower_bound.csv");
    write_header(out, cfg, "#", "");
    out << "M,N,total_error,total_error_high,floor,margin\n";
    for (const auto& r : results)
        out << r.steps << "," << r.n_modes << "," << fmt_g(r.total_error) << ","
            << fmt_g(r.total_error_high) << "," << fmt_g(r.reference_floor) << ","
            << fmt_g(r.total_error - r.reference_floor) << "\n";

    const int n_max = *std::max_element(cfg.lb_modes.begin(), cfg.lb_modes.end());
    auto modes_out = open_artifact(out_dir, "lower_bound_modes.csv");
    write_header(modes_out, cfg, "#", "");
    modes_out << "M,n,resvar\n";
    for (const auto& r : results) {
        if (r.n_modes != n_max) continue;
        for (int n = 0; n <= r.n_modes; ++n)
            modes_out << r.steps << "," << n << "," << fmt_g(r.mode_residual[static_cast<size_t>(n)])
                      << "\n";
        modes_out << "# M=" << r.steps << " total=" << fmt_g(r.total_error)
                  << " floor=" << fmt_g(r.reference_floor)
                  << " margin=" << fmt_g(r.total_error - r.reference_floor) << "\n";
    }
    return results;
}

void run_sample_path(const ExperimentConfig& cfg, const std::string& out_dir) {
    SchemeConfig run_cfg;
    run_cfg.n_modes = cfg.path_modes;
    run_cfg.grid = TimeGrid(cfg.horizon, cfg.path_steps);
    run_cfg.u0 = cfg.make_u0(cfg.path_modes);
    run_cfg.reaction = cfg.make_reaction();
    run_cfg.oversample = cfg.oversample;

    Trajectory traj;
    const RngStream stream{cfg.base_seed, 0};
    switch (cfg.scheme_kind()) {
        case SchemeKind::exp_euler:
            traj = run_exponential_euler(run_cfg, sample_ou_path(run_cfg.grid, cfg.path_modes, stream));
            break;
        case SchemeKind::splitting:
            traj = run_splitting(run_cfg, sample_ou_path(run_cfg.grid, cfg.path_modes, stream));
            break;
        case SchemeKind::wiener_baseline:
            traj = run_wiener_baseline(run_cfg,
                                       sample_wiener_path(run_cfg.grid, cfg.path_modes, stream));
            break;
    }

    const int n_x = fft::next_fast_size(std::max(cfg.path_points, 2 * cfg.path_modes + 1));
    auto out = open_artifact(out_dir, "sample_path.csv");
    write_header(out, cfg, "#", "");
    out << "# columns: t then " << n_x << " equispaced field values\n";
    for (int k = 0; k <= run_cfg.grid.steps; ++k) {
        out << fmt_g(run_cfg.grid.point(k));
        const RealGridField phys = to_physical(traj.states[static_cast<size_t>(k)], n_x);
        for (double v : phys.values) out << "," << fmt_g(v);
        out << "\n";
    }
}

// --------------------------------------------------------------------------
// Selftest: quick oracle-backed checks
// --------------------------------------------------------------------------

namespace {

struct CheckSink {
    std::ostream& out;
    bool all_ok = true;
    void report(const std::string& name, bool ok, const std::string& detail = "") {
        out << (ok ? "[ok]   " : "[FAIL] ") << name;
        if (!detail.empty()) out << " (" << detail << ")";
        out << "\n";
        all_ok = all_ok && ok;
    }
};

double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

} // namespace

bool run_selftest(const ExperimentConfig& cfg, std::ostream& out) {
    CheckSink sink{out};

    {
        double worst = 0.0;
        for (int k : {0, 1, 8, 64})
            for (double h : {1e-3, 0.125, 1.0}) {
                const double rate = mode_rate(k);
                const double quad = adaptive_simpson(
                    [rate](double s) { return std::exp(-rate * s); }, 0.0, h, 1e-15);
                worst = std::max(worst, rel_err(heat_integral_multiplier(k, h), quad));
            }
        sink.report("integrated heat weights vs quadrature", worst < 1e-9,
                    "worst rel err " + fmt_g(worst));
    }
    {
        double worst = 0.0;
        const double h = 0.125;
        for (int n : {0, 1, 4}) {
            const double rate = mode_rate(n);
            const auto cov = joint_step_covariance(1.0, rate, h);
            const double q_sol = adaptive_simpson(
                [&](double s) { return std::exp(2.0 * (1.0 - rate) * s); }, 0.0, h);
            const double q_conv = adaptive_simpson(
                [&](double s) { return std::exp(-2.0 * rate * s); }, 0.0, h);
            const double q_cross = adaptive_simpson(
                [&](double s) { return std::exp((1.0 - rate) * s) * std::exp(-rate * s); }, 0.0, h);
            worst = std::max({worst, rel_err(cov.var_solution, q_sol),
                              rel_err(cov.var_convolution, q_conv), rel_err(cov.cross, q_cross)});
        }
        sink.report("transition covariances vs quadrature", worst < 1e-9,
                    "worst rel err " + fmt_g(worst));
    }
    {
        Nonlinearity numeric = allen_cahn();
        numeric.exact_flow.reset();
        const Nonlinearity closed = allen_cahn();
        double worst = 0.0;
        for (double z = -5.0; z <= 5.0; z += 0.5)
            for (double h : {0.01, 0.5, 1.0})
                worst = std::max(worst, std::abs(flow(closed, h, z) - flow(numeric, h, z)));
        sink.report("closed-form reaction flow vs adaptive integration", worst < 1e-10,
                    "worst abs err " + fmt_g(worst));
    }
    {
        SchemeConfig rc;
        rc.n_modes = 15;
        rc.grid = TimeGrid(1.0, 32);
        rc.reaction = zero_reaction();
        const OuPath path = sample_ou_path(rc.grid, rc.n_modes, {cfg.base_seed, 7});
        const Trajectory te = run_exponential_euler(rc, path);
        const Trajectory ts = run_splitting(rc, path);
        double worst = 0.0;
        for (int k = 0; k <= rc.grid.steps; ++k) {
            worst = std::max(worst, field_norm(te.states[static_cast<size_t>(k)] -
                                                   path.samples[static_cast<size_t>(k)],
                                               NormKind::L2));
            worst = std::max(worst, field_norm(ts.states[static_cast<size_t>(k)] -
                                                   path.samples[static_cast<size_t>(k)],
                                               NormKind::L2));
        }
        sink.report("zero reaction reproduces the sampled convolution", worst == 0.0,
                    "max deviation " + fmt_g(worst));
    }
    {
        double worst = 0.0;
        for (int k = 0; k <= 256; ++k) {
            double s = 0.0;
            for (int j = -1; j <= max_block_index(256) + 2; ++j)
                s += block_weight(j, static_cast<double>(k));
            worst = std::max(worst, std::abs(s - 1.0));
        }
        sink.report("dyadic blocks form a partition of unity", worst < 1e-12,
                    "worst defect " + fmt_g(worst));
    }
    {
        // Scalar re-implementation of the linear-drift recursion, one mode.
        const int N = 7, M = 16;
        const double c = 0.75;
        SchemeConfig rc;
        rc.n_modes = N;
        rc.grid = TimeGrid(1.0, M);
        rc.reaction = linear(c);
        const OuPath path = sample_ou_path(rc.grid, N, {cfg.base_seed, 11});
        const Trajectory traj = run_exponential_euler(rc, path);
        double worst = 0.0;
        for (int n = 0; n <= N; ++n) {
            const double h = rc.grid.dt();
            const double decay = std::exp(-mode_rate(n) * h);
            const double weight = heat_integral_multiplier(n, h);
            std::complex<double> v = 0.0;
            for (int k = 0; k < M; ++k) {
                v = decay * v + weight * (c * v) + path.samples[static_cast<size_t>(k) + 1].at(n) -
                    decay * path.samples[static_cast<size_t>(k)].at(n);
            }
            worst = std::max(worst, std::abs(v - traj.states.back().at(n)));
        }
        sink.report("field recursion matches scalar oracle", worst < 1e-12,
                    "worst abs err " + fmt_g(worst));
    }
    return sink.all_ok;
}

} // namespace spde
