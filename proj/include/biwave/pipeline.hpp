#pragma once

// Experiment orchestration behind the command-line tool. Every run writes its tables
// into an output directory together with manifest.txt (version, command, seed, the
// effective configuration, and a git-style blob hash of each file written).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <Eigen/Dense>

#include "biwave/config.hpp"
#include "biwave/error.hpp"
#include "biwave/estimators.hpp"
#include "biwave/forward.hpp"
#include "biwave/greens.hpp"
#include "biwave/inverse.hpp"
#include "biwave/io.hpp"
#include "biwave/noise.hpp"
#include "biwave/specfun.hpp"

#ifndef BIWAVE_VERSION
#define BIWAVE_VERSION "0.0.0"
#endif

namespace biwave {

inline constexpr const char* version = BIWAVE_VERSION;

/// Hex SHA-1 of "blob <size>\0<bytes>", i.e. what `git hash-object` prints.
inline std::string git_blob_hash(const std::string& bytes) {
    const std::string payload = "blob " + std::to_string(bytes.size()) + std::string(1, '\0') + bytes;
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(payload.data(), payload.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
        throw std::runtime_error("SHA-1 digest failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class RunWriter {
public:
    RunWriter(std::filesystem::path dir, std::string command, const ExperimentConfig& cfg)
        : dir_(std::move(dir)), command_(std::move(command)), cfg_(cfg) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw InputError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }

    void write(const std::string& name, const std::function<void(std::ostream&)>& fn) {
        const auto path = (dir_ / name).string();
        io::save(path, fn);
        files_.push_back(name);
    }

    void note(const std::string& key, const std::string& value) { notes_.emplace_back(key, value); }

    [[nodiscard]] std::filesystem::path path(const std::string& name) const { return dir_ / name; }

    void finish() const {
        std::ofstream m(dir_ / "manifest.txt", std::ios::binary);
        if (!m) throw InputError("cannot write manifest in " + dir_.string());
        const std::string cfg_text = to_json(cfg_).dump(2);
        m << "biwave " << version << '\n';
        m << "command " << command_ << '\n';
        m << "seed " << cfg_.seed << '\n';
        for (const auto& [k, v] : notes_) m << k << ' ' << v << '\n';
        m << "config " << git_blob_hash(cfg_text) << '\n';
        for (const auto& f : files_) m << "file " << git_blob_hash(read_file(dir_ / f)) << ' ' << f << '\n';
        m << "--- config\n" << cfg_text << '\n';
    }

private:
    std::filesystem::path dir_;
    std::string command_;
    ExperimentConfig cfg_;
    std::vector<std::string> files_;
    std::vector<std::pair<std::string, std::string>> notes_;
};

namespace pipeline_detail {

inline std::string fmt(double v, int prec = 6) {
    std::ostringstream s;
    s << std::setprecision(prec) << v;
    return s.str();
}

inline void require_frequencies(const ExperimentConfig& cfg) {
    if (cfg.frequencies.empty()) throw ConfigError("no frequencies configured");
}

}  // namespace pipeline_detail

inline void run_forward(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log = std::cout) {
    pipeline_detail::require_frequencies(cfg);
    RunWriter run(out_dir, "forward", cfg);
    auto go = [&]<int Dim>() {
        const auto grid = make_source_grid<Dim>(cfg);
        const auto receivers = make_receivers<Dim>(cfg);
        const auto field = make_strength<Dim>(cfg);
        const auto w = sweep<Dim>(receivers, cfg.frequencies, field, grid, cfg.paths, cfg.seed);
        run.write("waves.csv", [&](std::ostream& o) { io::write_waves<Dim>(o, w); });
        log << "forward: " << receivers.size() << " receivers x " << cfg.paths << " paths x " << cfg.frequencies.size()
            << " frequencies\n";
    };
    if (cfg.dim == 2) {
        go.template operator()<2>();
    } else {
        go.template operator()<3>();
    }
    run.finish();
}

inline void run_measure(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log = std::cout) {
    pipeline_detail::require_frequencies(cfg);
    if (cfg.dim != 2) throw ConfigError("measure: measurement tables are two-dimensional");
    if (cfg.paths < 2) throw ConfigError("measure: at least two paths are required");
    RunWriter run(out_dir, "measure", cfg);
    const auto grid = make_source_grid<2>(cfg);
    const auto receivers = make_receivers<2>(cfg);
    const auto field = make_strength<2>(cfg);
    const auto m = synthesize_measurements<2>(receivers, cfg.frequencies, field, grid, cfg.paths, cfg.seed);
    run.write("measurements.csv", [&](std::ostream& o) { io::write_measurements(o, m.difference, receivers); });
    run.write("measurements_magnitude.csv", [&](std::ostream& o) { io::write_measurements(o, m.magnitude, receivers); });
    log << "measure: " << receivers.size() << " receivers, " << cfg.frequencies.size() << " frequencies, P = "
        << cfg.paths << '\n';
    run.finish();
}

struct InversionSummary {
    double relative_error = 0.0;
    Point<2> peak{};
    Eigen::VectorXd q;
};

/// Reads measurements from `measurements_path` when given, otherwise synthesizes them inline.
inline InversionSummary run_invert(const ExperimentConfig& cfg, const std::string& out_dir,
                                   const std::string& measurements_path = "", std::ostream& log = std::cout) {
    pipeline_detail::require_frequencies(cfg);
    if (cfg.dim != 2) throw ConfigError("invert: the Kaczmarz reconstruction is two-dimensional");
    const auto kind = cfg.inversion.data == "magnitude" ? MeasurementKind::Magnitude : MeasurementKind::Difference;
    const auto grid = make_source_grid<2>(cfg);
    const auto receivers = make_receivers<2>(cfg);
    const auto field = make_strength<2>(cfg);

    MeasurementTable table;
    if (!measurements_path.empty()) {
        if (!std::filesystem::exists(measurements_path)) throw InputError("missing measurements: " + measurements_path);
        table = io::read_measurements(measurements_path, receivers, kind);
    } else {
        if (cfg.paths < 2) throw ConfigError("invert: at least two paths are required");
        auto m = synthesize_measurements<2>(receivers, cfg.frequencies, field, grid, cfg.paths, cfg.seed);
        table = kind == MeasurementKind::Difference ? std::move(m.difference) : std::move(m.magnitude);
    }
    RunWriter run(out_dir, "invert", cfg);
    const auto groups = assemble_system(receivers, grid, table, cfg.frequencies);
    const auto res = invert(groups, cfg.inversion.gamma, cfg.inversion.sweeps,
                            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size())), cfg.inversion.clamp);

    const auto truth = field.sample(grid);
    std::vector<double> rec(res.q.data(), res.q.data() + res.q.size());
    InversionSummary s;
    s.relative_error = relative_l2_error(res.q, truth);
    Eigen::Index imax = 0;
    res.q.maxCoeff(&imax);
    s.peak = grid.node(static_cast<std::size_t>(imax));
    s.q = res.q;

    run.write("reconstruction.csv", [&](std::ostream& o) { io::write_reconstruction(o, grid, truth, res.q); });
    run.write("residuals.csv", [&](std::ostream& o) { io::write_residuals(o, res.history); });
    run.write("mu_true.pgm", [&](std::ostream& o) { io::write_pgm(o, grid, truth); });
    run.write("mu_rec.pgm", [&](std::ostream& o) { io::write_pgm(o, grid, rec); });
    run.note("relative_l2_error", pipeline_detail::fmt(s.relative_error, 17));
    run.finish();
    log << "invert: relative l2 error " << pipeline_detail::fmt(s.relative_error) << ", peak at ("
        << pipeline_detail::fmt(s.peak[0], 4) << ", " << pipeline_detail::fmt(s.peak[1], 4) << ")\n";
    return s;
}

struct ErgodicSummary {
    double exponent = 0.0;
    std::vector<double> ratios;
};

inline ErgodicSummary run_ergodic(const ExperimentConfig& cfg, const std::string& out_dir,
                                  std::ostream& log = std::cout) {
    RunWriter run(out_dir, "ergodic", cfg);
    ErgodicSummary s;
    auto go = [&]<int Dim>() {
        const auto grid = make_source_grid<Dim>(cfg);
        const auto receivers = make_receivers<Dim>(cfg);
        const auto field = make_strength<Dim>(cfg);
        const auto freqs = band_frequencies(cfg.ergodic.band_start, cfg.ergodic.nodes);
        const auto& e = cfg.ergodic;
        const FieldModel<Dim> model(e.m, field);
        const auto src = sample_fractional_field<Dim>(grid, model, cfg.seed, e.path);
        WaveSampleSet w;
        w.frequencies = freqs;
        w.receivers = receivers.size();
        w.paths = 1;
        w.seed = cfg.seed;
        w.values.resize(w.receivers * freqs.size());
        for (std::size_t f = 0; f < freqs.size(); ++f) {
            const auto u = forward_field<Dim>(receivers, freqs[f], src, grid);
            for (std::size_t r = 0; r < receivers.size(); ++r) w.at(r, 0, f) = u[r];
        }
        const auto est = ergodic_average(w, e.m, Dim);
        std::vector<double> ref(receivers.size());
        for (std::size_t r = 0; r < receivers.size(); ++r) ref[r] = reference_td<Dim>(receivers.points[r], field, grid);
        for (std::size_t r = 0; r < receivers.size(); ++r) s.ratios.push_back(est.values[r] / ref[r]);
        s.exponent = est.exponent;
        run.write("ergodic.csv", [&](std::ostream& o) { io::write_ergodic<Dim>(o, receivers, est.values, ref); });
        if (e.invert) {
            const auto res = invert_ergodic<Dim>(est, grid, receivers, e.gamma, e.sweeps);
            const auto truth = field.sample(grid);
            run.write("ergodic_reconstruction.csv", [&](std::ostream& o) {
                o << std::setprecision(17) << (Dim == 2 ? "y1,y2" : "y1,y2,y3") << ",mu_true,mu_rec\n";
                for (std::size_t j = 0; j < grid.size(); ++j) {
                    const auto y = grid.node(j);
                    for (int d = 0; d < Dim; ++d) o << y[d] << ',';
                    o << truth[j] << ',' << res.q(static_cast<Eigen::Index>(j)) << '\n';
                }
            });
            log << "ergodic: reconstruction relative l2 error " << pipeline_detail::fmt(relative_l2_error(res.q, truth))
                << '\n';
        }
    };
    if (cfg.dim == 2) {
        go.template operator()<2>();
    } else {
        go.template operator()<3>();
    }
    run.note("exponent", pipeline_detail::fmt(s.exponent));
    run.finish();
    log << "ergodic: d = " << cfg.dim << ", exponent m+7-d = " << pipeline_detail::fmt(s.exponent) << ", T = "
        << cfg.ergodic.band_start << ", " << cfg.ergodic.nodes << " nodes\n";
    const std::size_t shown = std::min<std::size_t>(s.ratios.size(), 10);
    for (std::size_t r = 0; r < shown; ++r) {
        log << "  receiver " << r << ": Td_hat / Td = " << pipeline_detail::fmt(s.ratios[r], 4) << '\n';
    }
    if (shown < s.ratios.size()) log << "  (" << s.ratios.size() - shown << " more in ergodic.csv)\n";
    return s;
}

struct SelftestCheck {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    [[nodiscard]] bool pass() const { return std::isfinite(measured) && measured <= tolerance; }
};

struct SelftestOptions {
    double a0_perturbation = 0.0;  // debug hook: relative perturbation applied to a_0
};

/// Fast invariant suite. Special functions are compared with the C++17 special math
/// functions of the standard library, which share no code with ours.
inline std::vector<SelftestCheck> run_selftest(const SelftestOptions& opt = {}) {
    using specfun::cplx;
    std::vector<SelftestCheck> out;

    double j0_err = 0.0;
    double y0_err = 0.0;
    double k0_err = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double x = std::pow(10.0, -2.0 + 4.0 * i / 199.0);
        j0_err = std::max(j0_err, std::abs(specfun::bessel_j0(x) - std::cyl_bessel_j(0.0, x)));
        y0_err = std::max(y0_err, std::abs(specfun::bessel_y0(x) - std::cyl_neumann(0.0, x)));
        const double k_ref = std::cyl_bessel_k(0.0, x);
        k0_err = std::max(k0_err, std::abs(specfun::macdonald_k0(x) - k_ref) / k_ref);
    }
    out.push_back({"J0 abs error, 200 points in [1e-2, 100]", j0_err, 1e-12});
    out.push_back({"Y0 abs error, 200 points in [1e-2, 100]", y0_err, 1e-10});
    out.push_back({"K0 rel error, 200 points in [1e-2, 100]", k0_err, 1e-10});

    auto coeffs = specfun::asymptotic_coefficients(5);
    coeffs.entries[0] *= 1.0 + opt.a0_perturbation;
    const cplx a0_ref = std::sqrt(2.0 / std::numbers::pi) * std::polar(1.0, -std::numbers::pi / 4.0);
    out.push_back({"a_0 rel error", std::abs(coeffs[0] - a0_ref) / std::abs(a0_ref), 1e-14});
    double ratio_err = 0.0;
    for (std::size_t j = 1; j <= 5; ++j) {
        const double jj = static_cast<double>(j);
        const cplx expect = cplx(0.0, 1.0 / 8.0) * (2.0 * jj - 1.0) * (2.0 * jj - 1.0) / jj;
        ratio_err = std::max(ratio_err, std::abs(coeffs[j] / coeffs[j - 1] - expect) / std::abs(expect));
    }
    out.push_back({"a_j / a_{j-1} ratio rel error", ratio_err, 1e-14});

    out.push_back({"phi_2d(1e-6, 1) rel distance to i/8",
                   std::abs(greens::phi_2d(1e-6, 1.0) - cplx(0.0, 0.125)) / 0.125, 1e-4});
    out.push_back({"G(1e-6, 1) distance to -1", std::abs(greens::measurement_kernel_g(1e-6, 1.0) + 1.0), 1e-3});

    double g_err = 0.0;
    double split_err = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double r = 0.2 + 0.13 * i;
        const double k = 0.5 + 0.37 * (i % 11);
        const cplx p = greens::phi_2d(r, k);
        const double g_ref = 64.0 * std::pow(k, 4) * (p.real() * p.real() - p.imag() * p.imag());
        g_err = std::max(g_err, std::abs(greens::measurement_kernel_g(r, k) - g_ref) / std::max(1.0, std::abs(g_ref)));
        for (int dim : {2, 3}) {
            const auto [pp, pm] = greens::helmholtz_components(r, k, dim);
            const cplx phi = dim == 2 ? p : greens::phi_3d(r, k);
            split_err = std::max(split_err, std::abs((pp - pm) / (2.0 * k * k) - phi) / std::abs(phi));
        }
    }
    out.push_back({"G = 64k^4 ((Re phi)^2 - (Im phi)^2)", g_err, 1e-12});
    out.push_back({"(phi+ - phi-) / 2k^2 = phi", split_err, 1e-12});

    {
        BlockSystem b{Eigen::MatrixXd::Identity(5, 5), Eigen::VectorXd::LinSpaced(5, 1.0, 5.0), 1.0, 1};
        const std::vector<BlockSystem> blocks{b};
        const auto q0 = kaczmarz_sweep(blocks, Eigen::VectorXd::Zero(5), 0.0);
        const auto q1 = kaczmarz_sweep(blocks, Eigen::VectorXd::Zero(5), 0.25);
        out.push_back({"Kaczmarz identity block, gamma = 0", (q0 - b.rhs).norm(), 1e-15});
        out.push_back({"Kaczmarz identity block, q = b / (1 + gamma)", (q1 - b.rhs / 1.25).norm(), 1e-15});
    }

    {
        const Grid<2> grid({0.0, 0.0}, {0.1, 0.1}, {100, 100});
        double sum = 0.0;
        double sum2 = 0.0;
        const auto w = sample_white_noise(grid, 7, 0);
        for (double v : w.increments) {
            sum += v;
            sum2 += v * v;
        }
        const auto n = static_cast<double>(w.increments.size());
        const double var = sum2 / n - (sum / n) * (sum / n);
        out.push_back({"white-noise variance / |I| - 1", std::abs(var / grid.cell_area() - 1.0), 0.05});
    }
    return out;
}

}  // namespace biwave
