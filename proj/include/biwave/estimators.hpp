#pragma once

// Statistical reductions of wave samples: Monte Carlo measurement tables, the
// single-path frequency-band average, and deterministic quadrature references.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "biwave/error.hpp"
#include "biwave/forward.hpp"
#include "biwave/greens.hpp"
#include "biwave/grid.hpp"
#include "biwave/strength.hpp"

namespace biwave {

/// Difference: 64k^4 E[(Re u)^2 - (Im u)^2], the data of the modified kernel G.
/// Magnitude:  64k^4 E|u|^2, the raw data of the kernel |H0(kr) - H0(ikr)|^2.
enum class MeasurementKind { Difference, Magnitude };

struct MeasurementTable {
    MeasurementKind kind = MeasurementKind::Difference;
    std::vector<double> frequencies;
    std::size_t receivers = 0;
    std::vector<double> values;  // (receiver, frequency), frequency fastest
    std::vector<double> std_errors;

    [[nodiscard]] std::size_t index(std::size_t r, std::size_t f) const { return r * frequencies.size() + f; }
    [[nodiscard]] double value(std::size_t r, std::size_t f) const { return values[index(r, f)]; }
    [[nodiscard]] double standard_error(std::size_t r, std::size_t f) const { return std_errors[index(r, f)]; }

    /// Index of frequency k, or -1 when absent.
    [[nodiscard]] long find_frequency(double k) const {
        for (std::size_t f = 0; f < frequencies.size(); ++f) {
            if (std::abs(frequencies[f] - k) <= 1e-12 * std::max(1.0, k)) return static_cast<long>(f);
        }
        return -1;
    }
};

inline double measurement_sample(cplx u, double k, MeasurementKind kind) {
    const double scale = 64.0 * k * k * k * k;
    const double re2 = u.real() * u.real();
    const double im2 = u.imag() * u.imag();
    return scale * (kind == MeasurementKind::Difference ? re2 - im2 : re2 + im2);
}

/// Per (receiver, k) sample mean over paths with its standard error s / sqrt(P).
inline MeasurementTable measurement_mc(const WaveSampleSet& samples,
                                       MeasurementKind kind = MeasurementKind::Difference) {
    if (samples.paths < 2) throw ConfigError("measurement_mc: at least two paths are required");
    if (samples.values.size() != samples.receivers * samples.paths * samples.frequencies.size()) {
        throw ConfigError("measurement_mc: sample array shape mismatch");
    }
    MeasurementTable t;
    t.kind = kind;
    t.frequencies = samples.frequencies;
    t.receivers = samples.receivers;
    t.values.resize(samples.receivers * samples.frequencies.size());
    t.std_errors.resize(t.values.size());
    const auto n = static_cast<double>(samples.paths);
    for (std::size_t r = 0; r < samples.receivers; ++r) {
        for (std::size_t f = 0; f < samples.frequencies.size(); ++f) {
            const double k = samples.frequencies[f];
            double sum = 0.0;
            for (std::size_t p = 0; p < samples.paths; ++p) sum += measurement_sample(samples.at(r, p, f), k, kind);
            const double mean = sum / n;
            double ss = 0.0;
            for (std::size_t p = 0; p < samples.paths; ++p) {
                const double d = measurement_sample(samples.at(r, p, f), k, kind) - mean;
                ss += d * d;
            }
            t.values[t.index(r, f)] = mean;
            t.std_errors[t.index(r, f)] = std::sqrt(ss / (n - 1.0) / n);
        }
    }
    return t;
}

struct MeasurementPair {
    MeasurementTable difference;
    MeasurementTable magnitude;
};

/// Streams the Monte Carlo forward solve frequency by frequency and reduces each batch
/// immediately, so the full receiver x path x frequency array is never held. Gives the
/// same tables as measurement_mc(sweep(...)) up to summation order.
template <int Dim>
inline MeasurementPair synthesize_measurements(const ReceiverSet<Dim>& receivers, std::span<const double> frequencies,
                                               const StrengthField<Dim>& field, const Grid<Dim>& grid,
                                               std::size_t paths, std::uint64_t seed,
                                               KernelKind kind = KernelKind::Full) {
    detail::check_frequencies(frequencies);
    if (paths < 2) throw ConfigError("synthesize_measurements: at least two paths are required");
    receivers.require_outside(grid.bounds());

    MeasurementPair out;
    for (auto* t : {&out.difference, &out.magnitude}) {
        t->frequencies.assign(frequencies.begin(), frequencies.end());
        t->receivers = receivers.size();
        t->values.assign(receivers.size() * frequencies.size(), 0.0);
        t->std_errors.assign(t->values.size(), 0.0);
    }
    out.difference.kind = MeasurementKind::Difference;
    out.magnitude.kind = MeasurementKind::Magnitude;

    const Eigen::MatrixXd s = source_matrix(grid, field, paths, seed);
    const auto n = static_cast<double>(paths);
    for (std::size_t f = 0; f < frequencies.size(); ++f) {
        const double k = frequencies[f];
        const double scale = 64.0 * k * k * k * k;
        const auto km = kernel_matrix(receivers, grid, k, kind);
        const Eigen::MatrixXd re2 = (km.re * s).array().square().matrix() * scale;
        const Eigen::MatrixXd im2 = (km.im * s).array().square().matrix() * scale;
        for (std::size_t r = 0; r < receivers.size(); ++r) {
            const auto ri = static_cast<Eigen::Index>(r);
            const Eigen::ArrayXd diff = (re2.row(ri) - im2.row(ri)).array();
            const Eigen::ArrayXd mag = (re2.row(ri) + im2.row(ri)).array();
            const std::size_t idx = out.difference.index(r, f);
            for (auto [arr, table] : {std::pair{&diff, &out.difference}, std::pair{&mag, &out.magnitude}}) {
                const double mean = arr->sum() / n;
                const double ss = (*arr - mean).square().sum();
                table->values[idx] = mean;
                table->std_errors[idx] = std::sqrt(ss / (n - 1.0) / n);
            }
        }
    }
    return out;
}

/// Noise-free expectation of the measurement: sum_j |I| K(|x_i - y_j|, k) mu(y_j) with
/// K = G (difference) or |H0(kr) - H0(ikr)|^2 (magnitude).
inline MeasurementTable expected_measurement(const ReceiverSet<2>& receivers, std::span<const double> frequencies,
                                             const StrengthField<2>& field, const Grid<2>& grid,
                                             MeasurementKind kind = MeasurementKind::Difference) {
    detail::check_frequencies(frequencies);
    const auto mu = field.sample(grid);
    MeasurementTable t;
    t.kind = kind;
    t.frequencies.assign(frequencies.begin(), frequencies.end());
    t.receivers = receivers.size();
    t.values.assign(receivers.size() * frequencies.size(), 0.0);
    t.std_errors.assign(t.values.size(), 0.0);
    const double area = grid.cell_area();
    for (std::size_t r = 0; r < receivers.size(); ++r) {
        for (std::size_t f = 0; f < frequencies.size(); ++f) {
            double acc = 0.0;
            for (std::size_t j = 0; j < grid.size(); ++j) {
                if (mu[j] == 0.0) continue;
                const double dist = distance<2>(receivers.points[r], grid.node(j));
                const double kern = kind == MeasurementKind::Difference
                                        ? greens::measurement_kernel_g(dist, frequencies[f])
                                        : greens::magnitude_kernel(dist, frequencies[f]);
                acc += area * kern * mu[j];
            }
            t.values[t.index(r, f)] = acc;
        }
    }
    return t;
}

/// Band average (1/T) Int_T^{2T} k^{m+7-d} |u(x; k)|^2 dk for one path, per receiver.
struct ErgodicEstimate {
    std::vector<double> values;
    double band_start = 0.0;  // T
    double exponent = 0.0;    // m + 7 - d
    std::size_t nodes = 0;
};

/// Uniform frequency grid of `nodes` points on [T, 2T].
inline std::vector<double> band_frequencies(double band_start, std::size_t nodes) {
    if (!(band_start > 0.0)) throw ConfigError("band_frequencies: T must be > 0");
    if (nodes < 2) throw ConfigError("band_frequencies: at least two nodes are required");
    std::vector<double> k(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        k[i] = band_start * (1.0 + static_cast<double>(i) / static_cast<double>(nodes - 1));
    }
    return k;
}

inline double ergodic_exponent(double m, int dim) {
    if (dim != 2 && dim != 3) throw ConfigError("dimension must be 2 or 3");
    return m + 7.0 - dim;
}

/// Composite trapezoid of k^exponent * g(k) over the frequency nodes, divided by T;
/// the nodes must span exactly [T, 2T].
inline double band_average(std::span<const double> freqs, std::span<const double> integrand, double exponent) {
    if (freqs.size() < 2 || freqs.size() != integrand.size()) throw ConfigError("band_average: bad node arrays");
    const double t = freqs.front();
    if (!(t > 0.0) || std::abs(freqs.back() - 2.0 * t) > 1e-9 * t) {
        throw ConfigError("band_average: frequency grid does not cover [T, 2T]");
    }
    double acc = 0.0;
    for (std::size_t i = 1; i < freqs.size(); ++i) {
        const double h = freqs[i] - freqs[i - 1];
        if (!(h > 0.0)) throw ConfigError("band_average: frequencies must increase");
        acc += 0.5 * h * (std::pow(freqs[i - 1], exponent) * integrand[i - 1] + std::pow(freqs[i], exponent) * integrand[i]);
    }
    return acc / t;
}

inline ErgodicEstimate ergodic_average(const WaveSampleSet& samples, double m, int dim, std::size_t path = 0) {
    if (path >= samples.paths) throw ConfigError("ergodic_average: path index out of range");
    ErgodicEstimate e;
    e.exponent = ergodic_exponent(m, dim);
    e.band_start = samples.frequencies.front();
    e.nodes = samples.frequencies.size();
    e.values.resize(samples.receivers);
    std::vector<double> mag2(samples.frequencies.size());
    for (std::size_t r = 0; r < samples.receivers; ++r) {
        for (std::size_t f = 0; f < mag2.size(); ++f) mag2[f] = std::norm(samples.at(r, path, f));
        e.values[r] = band_average(samples.frequencies, mag2, e.exponent);
    }
    return e;
}

/// 1 / (16 (2 pi)^{d-1}).
inline double td_constant(int dim) { return 1.0 / (16.0 * std::pow(2.0 * std::numbers::pi, dim - 1)); }

/// T_d(x) = c_d Int_D |x - z|^{-(d-1)} mu(z) dz by the cell-corner rule of the forward solver.
template <int Dim>
inline double reference_td(const Point<Dim>& x, const StrengthField<Dim>& field, const Grid<Dim>& grid) {
    if (!(grid.bounds().distance_to(x) > 0.0)) throw PreconditionError("reference_td: x lies inside D");
    const double area = grid.cell_area();
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto y = grid.node(j);
        const double mu = field(y);
        if (mu == 0.0) continue;
        acc += area * mu * std::pow(distance<Dim>(x, y), -(Dim - 1));
    }
    return td_constant(Dim) * acc;
}

/// Per (receiver, frequency): Monte Carlo ratio k^{m+7-d} mean|u|^2 / T_d with its standard
/// error, and the same ratio for the exact second moment of the discrete model.
struct MomentRatio {
    double k = 0.0;
    double mc_ratio = std::numeric_limits<double>::quiet_NaN();
    double mc_stderr = std::numeric_limits<double>::quiet_NaN();
    double model_ratio = std::numeric_limits<double>::quiet_NaN();
};

struct VarianceAsymptoticsReport {
    std::vector<double> td;                       // per receiver
    std::vector<std::vector<MomentRatio>> ratios;  // [receiver][frequency]
    std::vector<double> drift_slope;              // d(mc_ratio)/d(1/k) per receiver
    bool degenerate = false;                       // T_d == 0 somewhere (mu = 0): ratios undefined
};

template <int Dim>
inline VarianceAsymptoticsReport variance_asymptotics_check(const WaveSampleSet& samples,
                                                            const ReceiverSet<Dim>& receivers,
                                                            const StrengthField<Dim>& field, const Grid<Dim>& grid,
                                                            double m, KernelKind kind = KernelKind::Full) {
    if (samples.receivers != receivers.size()) throw ConfigError("variance_asymptotics_check: receiver mismatch");
    const double exponent = ergodic_exponent(m, Dim);
    const auto coeffs = specfun::asymptotic_coefficients(greens::forward_truncation_order);
    const auto mu = field.sample(grid);
    const double area = grid.cell_area();
    const auto n = static_cast<double>(samples.paths);

    VarianceAsymptoticsReport rep;
    rep.td.resize(receivers.size());
    rep.ratios.resize(receivers.size());
    rep.drift_slope.assign(receivers.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t r = 0; r < receivers.size(); ++r) {
        rep.td[r] = reference_td<Dim>(receivers.points[r], field, grid);
        if (!(rep.td[r] > 0.0)) {
            rep.degenerate = true;
            rep.ratios[r].resize(samples.frequencies.size());
            for (std::size_t f = 0; f < samples.frequencies.size(); ++f) rep.ratios[r][f].k = samples.frequencies[f];
            continue;
        }
        std::vector<double> inv_k;
        std::vector<double> ratio;
        for (std::size_t f = 0; f < samples.frequencies.size(); ++f) {
            const double k = samples.frequencies[f];
            const double scale = std::pow(k, exponent) / rep.td[r];
            double sum = 0.0;
            double sum2 = 0.0;
            for (std::size_t p = 0; p < samples.paths; ++p) {
                const double v = std::norm(samples.at(r, p, f));
                sum += v;
                sum2 += v * v;
            }
            const double mean = sum / n;
            const double var = samples.paths > 1 ? (sum2 - n * mean * mean) / (n - 1.0) : 0.0;
            double model = 0.0;
            if (m == 0.0) {
                for (std::size_t j = 0; j < grid.size(); ++j) {
                    if (mu[j] <= 0.0) continue;
                    const double dist = distance<Dim>(receivers.points[r], grid.node(j));
                    model += std::norm(forward_weight<Dim>(dist, k, kind, coeffs)) * mu[j] * area;
                }
            }
            MomentRatio mr;
            mr.k = k;
            mr.mc_ratio = scale * mean;
            mr.mc_stderr = scale * std::sqrt(std::max(var, 0.0) / n);
            mr.model_ratio = m == 0.0 ? scale * model : std::numeric_limits<double>::quiet_NaN();
            rep.ratios[r].push_back(mr);
            inv_k.push_back(1.0 / k);
            ratio.push_back(mr.mc_ratio);
        }
        if (inv_k.size() >= 2) {
            double mx = 0.0;
            double my = 0.0;
            for (std::size_t i = 0; i < inv_k.size(); ++i) {
                mx += inv_k[i];
                my += ratio[i];
            }
            mx /= static_cast<double>(inv_k.size());
            my /= static_cast<double>(inv_k.size());
            double sxy = 0.0;
            double sxx = 0.0;
            for (std::size_t i = 0; i < inv_k.size(); ++i) {
                sxy += (inv_k[i] - mx) * (ratio[i] - my);
                sxx += (inv_k[i] - mx) * (inv_k[i] - mx);
            }
            rep.drift_slope[r] = sxy / sxx;
        }
    }
    return rep;
}

}  // namespace biwave
