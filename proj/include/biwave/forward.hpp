#pragma once

// Monte Carlo forward solver: the wave field u(x; k) = -Int_D Phi(x, y, k) f(y) dy
// discretized as -sum_j Phi(|x - y_j|, k) sqrt(mu(y_j)) delta_j W over cell corners.

#include <algorithm>
#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "biwave/error.hpp"
#include "biwave/greens.hpp"
#include "biwave/grid.hpp"
#include "biwave/noise.hpp"
#include "biwave/strength.hpp"

namespace biwave {

using cplx = std::complex<double>;

/// Which kernel the quadrature uses: the exact fundamental solution or, in 2D, the
/// N = 3 asymptotic truncation Phi_3.
enum class KernelKind { Full, Truncated };

template <int Dim>
struct ReceiverSet {
    std::vector<Point<Dim>> points;
    std::vector<int> domain;             // measurement domain label U_n
    std::vector<Index<Dim>> lattice;     // index within its domain lattice

    [[nodiscard]] std::size_t size() const { return points.size(); }

    void add(const Point<Dim>& p, int label, const Index<Dim>& idx = {}) {
        points.push_back(p);
        domain.push_back(label);
        lattice.push_back(idx);
    }

    /// Lattice points covering `box`, spacing side / intervals on every axis of positive
    /// extent; a flat axis (lower == upper) contributes a single node.
    void add_lattice(const Box<Dim>& box, std::size_t intervals, int label) {
        if (intervals < 1) throw ConfigError("add_lattice: intervals must be >= 1");
        std::array<std::size_t, Dim> counts{};
        Point<Dim> step{};
        std::size_t total = 1;
        for (int d = 0; d < Dim; ++d) {
            const double side = box.upper[d] - box.lower[d];
            if (side < 0.0) throw ConfigError("add_lattice: box upper corner below lower corner");
            counts[d] = side > 0.0 ? intervals + 1 : 1;
            step[d] = side / static_cast<double>(intervals);
            total *= counts[d];
        }
        for (std::size_t lin = 0; lin < total; ++lin) {
            std::size_t rest = lin;
            Index<Dim> j{};
            Point<Dim> p{};
            for (int d = Dim - 1; d >= 0; --d) {
                j[d] = static_cast<long>(rest % counts[d]);
                rest /= counts[d];
            }
            for (int d = 0; d < Dim; ++d) p[d] = box.lower[d] + static_cast<double>(j[d]) * step[d];
            add(p, label, j);
        }
    }

    /// Indices of receivers carrying `label`, in receiver order.
    [[nodiscard]] std::vector<std::size_t> rows_of(int label) const {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < size(); ++i) {
            if (domain[i] == label) rows.push_back(i);
        }
        return rows;
    }

    /// Distinct labels in ascending order.
    [[nodiscard]] std::vector<int> labels() const {
        std::vector<int> out(domain);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// Throws unless every receiver keeps a positive distance from `source_box`.
    void require_outside(const Box<Dim>& source_box) const {
        for (std::size_t i = 0; i < size(); ++i) {
            if (!(source_box.distance_to(points[i]) > 0.0)) {
                throw PreconditionError("receiver " + std::to_string(i) + " lies inside the source domain");
            }
        }
    }
};

/// The four unit squares U1..U4 around D = [-1, 1]^2 with `intervals` cells per side.
inline ReceiverSet<2> standard_receivers(std::size_t intervals = 40) {
    ReceiverSet<2> rs;
    const std::array<Box<2>, 4> domains = {Box<2>{{1.5, 1.5}, {2.5, 2.5}}, Box<2>{{1.5, -2.5}, {2.5, -1.5}},
                                           Box<2>{{-2.5, -2.5}, {-1.5, -1.5}}, Box<2>{{-2.5, 1.5}, {-1.5, 2.5}}};
    for (int n = 0; n < 4; ++n) rs.add_lattice(domains[n], intervals, n + 1);
    return rs;
}

/// Values u(x_r; omega_p, k_f) for a batch of paths that share one noise realization
/// per path across all frequencies.
struct WaveSampleSet {
    std::vector<cplx> values;  // (receiver, path, frequency), frequency fastest
    std::vector<double> frequencies;
    std::size_t receivers = 0;
    std::size_t paths = 0;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t index(std::size_t r, std::size_t p, std::size_t f) const {
        return (r * paths + p) * frequencies.size() + f;
    }
    [[nodiscard]] const cplx& at(std::size_t r, std::size_t p, std::size_t f) const { return values[index(r, p, f)]; }
    cplx& at(std::size_t r, std::size_t p, std::size_t f) { return values[index(r, p, f)]; }
};

/// -Phi(r, k), the weight of a unit source increment at distance r.
template <int Dim>
inline cplx forward_weight(double r, double k, KernelKind kind, const specfun::SpectralCoefficients& coeffs) {
    if constexpr (Dim == 2) {
        return kind == KernelKind::Truncated ? -greens::truncated_phi_2d(r, k, coeffs) : -greens::phi_2d(r, k);
    } else {
        if (kind == KernelKind::Truncated) throw ConfigError("the truncated kernel is two-dimensional");
        return -greens::phi_3d(r, k);
    }
}

/// Real and imaginary parts of the receiver-by-node weight matrix at one frequency.
struct KernelMatrix {
    Eigen::MatrixXd re;
    Eigen::MatrixXd im;
};

template <int Dim>
inline KernelMatrix kernel_matrix(const ReceiverSet<Dim>& receivers, const Grid<Dim>& grid, double k,
                                  KernelKind kind = KernelKind::Full) {
    const auto coeffs = specfun::asymptotic_coefficients(greens::forward_truncation_order);
    const auto rows = static_cast<Eigen::Index>(receivers.size());
    const auto cols = static_cast<Eigen::Index>(grid.size());
    KernelMatrix km{Eigen::MatrixXd(rows, cols), Eigen::MatrixXd(rows, cols)};
    std::vector<Point<Dim>> nodes(grid.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) nodes[j] = grid.node(j);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& x = receivers.points[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < cols; ++j) {
            const cplx w = forward_weight<Dim>(distance<Dim>(x, nodes[static_cast<std::size_t>(j)]), k, kind, coeffs);
            km.re(i, j) = w.real();
            km.im(i, j) = w.imag();
        }
    }
    return km;
}

/// u at each receiver for explicit source weights s_j (e.g. sqrt(mu_j) delta_j W, or a
/// fractional field sample).
template <int Dim>
inline std::vector<cplx> forward_field(const ReceiverSet<Dim>& receivers, double k, std::span<const double> source,
                                       const Grid<Dim>& grid, KernelKind kind = KernelKind::Full) {
    if (!(k > 0.0)) throw DomainError("forward_field: k must be > 0");
    if (source.size() != grid.size()) throw ConfigError("forward_field: source size does not match grid");
    receivers.require_outside(grid.bounds());
    const auto coeffs = specfun::asymptotic_coefficients(greens::forward_truncation_order);
    std::vector<cplx> u(receivers.size());
    for (std::size_t i = 0; i < receivers.size(); ++i) {
        cplx acc = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            if (source[j] == 0.0) continue;
            acc += forward_weight<Dim>(distance<Dim>(receivers.points[i], grid.node(j)), k, kind, coeffs) * source[j];
        }
        u[i] = acc;
    }
    return u;
}

template <int Dim>
inline std::vector<cplx> forward_field(const ReceiverSet<Dim>& receivers, double k, const NoiseRealization& noise,
                                       const StrengthField<Dim>& field, const Grid<Dim>& grid,
                                       KernelKind kind = KernelKind::Full) {
    const auto mu = field.sample(grid);
    const auto s = white_noise_source(mu, noise.increments);
    return forward_field<Dim>(receivers, k, s, grid, kind);
}

inline std::vector<cplx> forward_field_2d(const ReceiverSet<2>& receivers, double k, const NoiseRealization& noise,
                                          const StrengthField<2>& field, const Grid<2>& grid) {
    return forward_field<2>(receivers, k, noise, field, grid, KernelKind::Full);
}

inline std::vector<cplx> forward_field_3d(const ReceiverSet<3>& receivers, double k, const NoiseRealization& noise,
                                          const StrengthField<3>& field, const Grid<3>& grid) {
    return forward_field<3>(receivers, k, noise, field, grid, KernelKind::Full);
}

/// u_3: the same quadrature with the truncated kernel Phi_3.
inline std::vector<cplx> truncated_field_2d(const ReceiverSet<2>& receivers, double k, const NoiseRealization& noise,
                                            const StrengthField<2>& field, const Grid<2>& grid) {
    return forward_field<2>(receivers, k, noise, field, grid, KernelKind::Truncated);
}

/// Node-by-path matrix of source weights for paths 0 .. paths-1.
template <int Dim>
inline Eigen::MatrixXd source_matrix(const Grid<Dim>& grid, const StrengthField<Dim>& field, std::size_t paths,
                                     std::uint64_t seed) {
    const auto mu = field.sample(grid);
    Eigen::MatrixXd s(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(paths));
    for (std::size_t p = 0; p < paths; ++p) {
        const auto noise = sample_white_noise(grid, seed, p);
        const auto w = white_noise_source(mu, noise.increments);
        for (std::size_t j = 0; j < w.size(); ++j) s(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(p)) = w[j];
    }
    return s;
}

namespace detail {

inline void check_frequencies(std::span<const double> freqs) {
    if (freqs.empty()) throw ConfigError("empty frequency list");
    for (std::size_t f = 0; f < freqs.size(); ++f) {
        if (!(freqs[f] > 0.0)) throw ConfigError("frequencies must be positive");
        if (f > 0 && !(freqs[f] > freqs[f - 1])) throw ConfigError("frequencies must be strictly increasing");
    }
}

}  // namespace detail

/// Paths x frequencies batch. Path p always uses noise (seed, p), reused for every k.
template <int Dim>
inline WaveSampleSet sweep(const ReceiverSet<Dim>& receivers, std::span<const double> frequencies,
                           const StrengthField<Dim>& field, const Grid<Dim>& grid, std::size_t paths,
                           std::uint64_t seed, KernelKind kind = KernelKind::Full) {
    detail::check_frequencies(frequencies);
    if (paths < 1) throw ConfigError("sweep: at least one path is required");
    receivers.require_outside(grid.bounds());

    WaveSampleSet out;
    out.frequencies.assign(frequencies.begin(), frequencies.end());
    out.receivers = receivers.size();
    out.paths = paths;
    out.seed = seed;
    out.values.resize(out.receivers * paths * frequencies.size());

    const Eigen::MatrixXd s = source_matrix(grid, field, paths, seed);
    for (std::size_t f = 0; f < frequencies.size(); ++f) {
        const auto km = kernel_matrix(receivers, grid, frequencies[f], kind);
        const Eigen::MatrixXd ure = km.re * s;
        const Eigen::MatrixXd uim = km.im * s;
        for (std::size_t r = 0; r < out.receivers; ++r) {
            for (std::size_t p = 0; p < paths; ++p) {
                const auto ri = static_cast<Eigen::Index>(r);
                const auto pi = static_cast<Eigen::Index>(p);
                out.at(r, p, f) = cplx(ure(ri, pi), uim(ri, pi));
            }
        }
    }
    return out;
}

}  // namespace biwave
