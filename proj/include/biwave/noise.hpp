#pragma once

// White-noise increments on a source lattice and spectrally filtered fractional
// fields sqrt(mu) (-Delta)^{-m/4} W'. Every normal variate is a pure function of
// (seed, path_index, lattice index), so paths regenerate bit-exactly in any order.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "biwave/error.hpp"
#include "biwave/grid.hpp"
#include "biwave/strength.hpp"

namespace biwave {

namespace rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform in (0, 1].
inline double to_unit(std::uint64_t x) {
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

/// Packs a (possibly negative) lattice index into 64 bits, 21 bits per axis.
template <int Dim>
inline std::uint64_t lattice_key(const Index<Dim>& j) {
    static_assert(Dim >= 1 && Dim <= 3);
    std::uint64_t key = 0;
    for (int d = 0; d < Dim; ++d) {
        const auto biased = static_cast<std::uint64_t>(j[d] + (1L << 20)) & ((1ULL << 21) - 1);
        key = (key << 21) | biased;
    }
    return key;
}

/// Standard normal variate for one (seed, path, cell) counter, via Box-Muller.
inline double standard_normal(std::uint64_t seed, std::uint64_t path, std::uint64_t cell) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ (path * 0xd1b54a32d192ed03ULL));
    h = splitmix64(h ^ (cell * 0x8cb92ba72f3d8dd7ULL));
    const double u1 = to_unit(splitmix64(h ^ 0x5851f42d4c957f2dULL));
    const double u2 = to_unit(splitmix64(h ^ 0x14057b7ef767814fULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rng

/// One sample path of cell increments delta_j W = sqrt(|I_j|) xi_j.
struct NoiseRealization {
    std::vector<double> increments;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
};

template <int Dim>
inline double white_noise_increment(const Grid<Dim>& grid, const Index<Dim>& j, std::uint64_t seed,
                                    std::uint64_t path) {
    return std::sqrt(grid.cell_area()) * rng::standard_normal(seed, path, rng::lattice_key<Dim>(j));
}

template <int Dim>
inline NoiseRealization sample_white_noise(const Grid<Dim>& grid, std::uint64_t seed, std::uint64_t path_index) {
    NoiseRealization out{std::vector<double>(grid.size()), seed, path_index};
    for (std::size_t j = 0; j < grid.size(); ++j) {
        out.increments[j] = white_noise_increment<Dim>(grid, grid.unravel(j), seed, path_index);
    }
    return out;
}

/// Quadrature weights sqrt(max(mu_j, 0)) * delta_j W of the Ito integral.
inline std::vector<double> white_noise_source(std::span<const double> mu, std::span<const double> increments) {
    if (mu.size() != increments.size()) throw ConfigError("white_noise_source: size mismatch");
    std::vector<double> s(mu.size());
    for (std::size_t j = 0; j < s.size(); ++j) s[j] = std::sqrt(std::max(mu[j], 0.0)) * increments[j];
    return s;
}

/// Order -m of a microlocally isotropic field, admissible for m in (d - 6, d].
template <int Dim>
struct FieldModel {
    double order = 0.0;
    StrengthField<Dim> strength;

    FieldModel(double m, StrengthField<Dim> mu) : order(m), strength(std::move(mu)) {
        if (!(order > Dim - 6.0 && order <= Dim)) {
            throw ConfigError("FieldModel: order m must lie in (d-6, d]");
        }
    }
};

namespace detail {

template <int Dim>
inline void fft_axis(std::vector<std::complex<double>>& data, const std::array<std::size_t, Dim>& shape, int axis,
                     bool inverse) {
    Eigen::FFT<double> fft;
    const std::size_t n = shape[axis];
    std::size_t stride = 1;
    for (int d = Dim - 1; d > axis; --d) stride *= shape[d];
    const std::size_t total = data.size();
    std::vector<std::complex<double>> line(n);
    std::vector<std::complex<double>> out(n);
    for (std::size_t base = 0; base < total; ++base) {
        if ((base / stride) % n != 0) continue;  // first element of each line along `axis`
        for (std::size_t i = 0; i < n; ++i) line[i] = data[base + i * stride];
        if (inverse) {
            fft.inv(out, line);
        } else {
            fft.fwd(out, line);
        }
        for (std::size_t i = 0; i < n; ++i) data[base + i * stride] = out[i];
    }
}

}  // namespace detail

/// In-place periodic filter: multiplies Fourier mode xi by |xi|^{-m/2} and zeroes the
/// mean mode. `values` is a row-major array of the given shape with lattice step `spacing`.
template <int Dim>
inline void fractional_filter(std::vector<double>& values, const std::array<std::size_t, Dim>& shape,
                              double spacing, double m) {
    std::size_t total = 1;
    for (auto n : shape) total *= n;
    if (values.size() != total) throw ConfigError("fractional_filter: shape mismatch");
    std::vector<std::complex<double>> spec(values.begin(), values.end());
    for (int a = 0; a < Dim; ++a) detail::fft_axis<Dim>(spec, shape, a, false);
    for (std::size_t lin = 0; lin < total; ++lin) {
        std::size_t rest = lin;
        double xi2 = 0.0;
        for (int d = Dim - 1; d >= 0; --d) {
            const std::size_t n = shape[d];
            const auto i = static_cast<long>(rest % n);
            rest /= n;
            const long signed_i = i <= static_cast<long>(n / 2) ? i : i - static_cast<long>(n);
            const double xi = 2.0 * std::numbers::pi * static_cast<double>(signed_i) / (static_cast<double>(n) * spacing);
            xi2 += xi * xi;
        }
        spec[lin] *= (xi2 == 0.0) ? 0.0 : std::pow(xi2, -m / 4.0);
    }
    for (int a = 0; a < Dim; ++a) detail::fft_axis<Dim>(spec, shape, a, true);
    for (std::size_t lin = 0; lin < total; ++lin) values[lin] = spec[lin].real();
}

/// One realization of sqrt(mu) (-Delta)^{-m/4} W' at the grid nodes, in units of cell
/// increments (so m = 0 reproduces white_noise_source bit-exactly). The grid is embedded
/// at the corner of a periodic box of side `box_side` on the same lattice.
template <int Dim>
inline std::vector<double> sample_fractional_field(const Grid<Dim>& grid, const FieldModel<Dim>& model,
                                                   std::uint64_t seed, std::uint64_t path_index,
                                                   double box_side = 4.0) {
    const auto mu = model.strength.sample(grid);
    if (model.order == 0.0) {
        const auto noise = sample_white_noise(grid, seed, path_index);
        return white_noise_source(mu, noise.increments);
    }
    const double h = grid.spacing()[0];
    for (int d = 1; d < Dim; ++d) {
        if (std::abs(grid.spacing()[d] - h) > 1e-12 * h) {
            throw ConfigError("sample_fractional_field: isotropic filtering needs equal spacing on all axes");
        }
    }
    if (box_side + 1e-12 < 2.0 * grid.bounds().max_side()) {
        throw ConfigError("sample_fractional_field: periodic box must be at least twice the domain side");
    }
    std::array<std::size_t, Dim> shape{};
    std::size_t total = 1;
    for (int d = 0; d < Dim; ++d) {
        shape[d] = static_cast<std::size_t>(std::llround(box_side / h));
        if (shape[d] < grid.counts()[d]) throw ConfigError("sample_fractional_field: box smaller than grid");
        total *= shape[d];
    }
    std::vector<double> box(total);
    for (std::size_t lin = 0; lin < total; ++lin) {
        std::size_t rest = lin;
        Index<Dim> j{};
        for (int d = Dim - 1; d >= 0; --d) {
            j[d] = static_cast<long>(rest % shape[d]);
            rest /= shape[d];
        }
        box[lin] = white_noise_increment<Dim>(grid, j, seed, path_index);
    }
    fractional_filter<Dim>(box, shape, h, model.order);

    std::vector<double> out(grid.size());
    for (std::size_t lin = 0; lin < out.size(); ++lin) {
        const auto j = grid.unravel(lin);
        std::size_t b = 0;
        for (int d = 0; d < Dim; ++d) b = b * shape[d] + static_cast<std::size_t>(j[d]);
        out[lin] = std::sqrt(std::max(mu[lin], 0.0)) * box[b];
    }
    return out;
}

}  // namespace biwave
