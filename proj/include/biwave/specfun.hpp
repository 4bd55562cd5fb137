#pragma once

// Order-zero Bessel, Neumann and Macdonald functions on the two rays used by the
// biharmonic Green's function (positive real axis and positive imaginary axis),
// plus the large-argument Hankel expansion coefficients.
//
// Small arguments use the ascending power series. Large arguments use the
// Laplace-type integral representation
//
//   H0(x) = sqrt(2/(pi x)) e^{i(x - pi/4)} pi^{-1/2} Int_R e^{-s^2} (1 + i s^2/(2x))^{-1/2} ds
//   K0(x) = sqrt(pi/(2x))  e^{-x}          pi^{-1/2} Int_R e^{-s^2} (1 +   s^2/(2x))^{-1/2} ds
//
// evaluated with the trapezoidal rule, which converges geometrically because the
// integrands are analytic in a strip of half-width sqrt(x) (resp. sqrt(2x)).

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "biwave/error.hpp"

namespace biwave::specfun {

using cplx = std::complex<double>;

inline constexpr double euler_gamma = 0.57721566490153286061;

/// Coefficients a_0..a_N of H0(z) ~ sum_j a_j z^{-(j+1/2)} e^{iz}.
struct SpectralCoefficients {
    std::vector<cplx> entries;

    [[nodiscard]] int order() const { return static_cast<int>(entries.size()) - 1; }
    [[nodiscard]] const cplx& operator[](std::size_t j) const { return entries[j]; }
};

namespace detail {

inline constexpr double series_cutoff_j0y0 = 8.0;
inline constexpr double series_cutoff_k0 = 2.0;

inline constexpr double quad_step = 0.2;
inline constexpr int quad_nodes = 33;  // s in [0, 6.4]; e^{-41} tail

inline const std::array<double, quad_nodes>& gaussian_weights() {
    static const std::array<double, quad_nodes> w = [] {
        std::array<double, quad_nodes> out{};
        for (int n = 0; n < quad_nodes; ++n) {
            const double s = n * quad_step;
            out[n] = std::exp(-s * s) * (n == 0 ? 1.0 : 2.0);
        }
        return out;
    }();
    return w;
}

/// pi^{-1/2} Int_R e^{-s^2} (1 + c s^2/(2x))^{-1/2} ds for c = i (oscillatory) or c = 1.
inline cplx laplace_integral(double x, bool oscillatory) {
    const auto& w = gaussian_weights();
    const double inv2x = 0.5 / x;
    cplx sum = 0.0;
    for (int n = quad_nodes - 1; n >= 0; --n) {
        const double s = n * quad_step;
        const double q = s * s * inv2x;
        if (oscillatory) {
            sum += w[n] / std::sqrt(cplx(1.0, q));
        } else {
            sum += w[n] / std::sqrt(1.0 + q);
        }
    }
    return sum * (quad_step / std::sqrt(std::numbers::pi));
}

struct J0Y0 {
    double j0;
    double y0;
};

inline J0Y0 j0y0_series(double x) {
    const double t = 0.25 * x * x;
    double term = 1.0;  // (-t)^n / (n!)^2
    double harmonic = 0.0;
    double j0 = 1.0;
    double corr = 0.0;
    for (int n = 1; n < 200; ++n) {
        term *= -t / (static_cast<double>(n) * n);
        harmonic += 1.0 / n;
        j0 += term;
        corr -= harmonic * term;
        if (std::abs(term) * harmonic < 1e-18) break;
    }
    const double y0 = (2.0 / std::numbers::pi) * ((std::log(0.5 * x) + euler_gamma) * j0 + corr);
    return {j0, y0};
}

inline double k0_series(double x) {
    const double t = 0.25 * x * x;
    double term = 1.0;  // t^n / (n!)^2
    double harmonic = 0.0;
    double i0 = 1.0;
    double corr = 0.0;
    for (int n = 1; n < 200; ++n) {
        term *= t / (static_cast<double>(n) * n);
        harmonic += 1.0 / n;
        i0 += term;
        corr += harmonic * term;
        if (term * harmonic < 1e-18 * corr) break;
    }
    return -(std::log(0.5 * x) + euler_gamma) * i0 + corr;
}

/// H0^{(1)}(x) for x > series cutoff; the phase factor is built from sin/cos of x
/// directly so that no rounding enters through x - pi/4.
inline cplx h0_large(double x) {
    const cplx integral = laplace_integral(x, true);
    const double c = std::cos(x);
    const double s = std::sin(x);
    const cplx phase((c + s) * std::numbers::sqrt2 * 0.5, (s - c) * std::numbers::sqrt2 * 0.5);
    return std::sqrt(2.0 / (std::numbers::pi * x)) * phase * integral;
}

inline double k0_large(double x) {
    const double integral = laplace_integral(x, false).real();
    return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) * integral;
}

inline void require_finite(double x, const char* fn) {
    if (!std::isfinite(x)) throw DomainError(std::string(fn) + ": non-finite argument");
}

inline void require_positive(double x, const char* fn) {
    require_finite(x, fn);
    if (!(x > 0.0)) throw DomainError(std::string(fn) + ": argument must be > 0, got " + std::to_string(x));
}

}  // namespace detail

/// Bessel function of the first kind, order zero, for x >= 0.
inline double bessel_j0(double x) {
    detail::require_finite(x, "bessel_j0");
    if (x < 0.0) throw DomainError("bessel_j0: argument must be >= 0");
    if (x <= detail::series_cutoff_j0y0) return detail::j0y0_series(x).j0;
    return detail::h0_large(x).real();
}

/// Bessel function of the second kind, order zero. Diverges like (2/pi) ln x at 0+.
inline double bessel_y0(double x) {
    detail::require_positive(x, "bessel_y0");
    if (x <= detail::series_cutoff_j0y0) return detail::j0y0_series(x).y0;
    return detail::h0_large(x).imag();
}

/// Macdonald function K0 (modified Bessel function of the second kind, order zero).
/// Underflows to 0 beyond x ~ 700.
inline double macdonald_k0(double x) {
    detail::require_positive(x, "macdonald_k0");
    if (x <= detail::series_cutoff_k0) return detail::k0_series(x);
    if (x > 745.0) return 0.0;
    return detail::k0_large(x);
}

/// H0^{(1)}(x) = J0(x) + i Y0(x) on the positive real axis.
inline cplx hankel_h0_real(double x) {
    detail::require_positive(x, "hankel_h0_real");
    if (x <= detail::series_cutoff_j0y0) {
        const auto v = detail::j0y0_series(x);
        return {v.j0, v.y0};
    }
    return detail::h0_large(x);
}

/// H0^{(1)}(ix) = -(2i/pi) K0(x) on the positive imaginary axis.
inline cplx hankel_h0_imag_axis(double x) {
    detail::require_positive(x, "hankel_h0_imag_axis");
    return {0.0, -(2.0 / std::numbers::pi) * macdonald_k0(x)};
}

/// a_j = sqrt(2/pi) (i/8)^j (prod_{l<=j} (2l-1)^2 / j!) e^{-i pi/4}, j = 0..N.
inline SpectralCoefficients asymptotic_coefficients(int order) {
    if (order < 0) throw DomainError("asymptotic_coefficients: order must be >= 0");
    const cplx a0 = std::sqrt(2.0 / std::numbers::pi) * cplx(std::numbers::sqrt2 * 0.5, -std::numbers::sqrt2 * 0.5);
    static constexpr std::array<cplx, 4> i_pow = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};

    SpectralCoefficients out;
    out.entries.reserve(static_cast<std::size_t>(order) + 1);
    for (int j = 0; j <= order; ++j) {
        double prod = 1.0;
        double fact = 1.0;
        for (int l = 1; l <= j; ++l) {
            prod *= static_cast<double>((2 * l - 1) * (2 * l - 1));
            fact *= l;
        }
        const double mag = std::ldexp(prod / fact, -3 * j);  // 8^{-j} exactly
        out.entries.push_back(a0 * i_pow[j % 4] * mag);
    }
    return out;
}

/// Principal-branch logarithm with arg in (-pi, pi].
inline cplx principal_log(cplx z) {
    double arg = std::arg(z);
    if (arg <= -std::numbers::pi) arg = std::numbers::pi;
    return {std::log(std::abs(z)), arg};
}

/// sum_{j<=N} a_j z^{-(j+1/2)} e^{iz} with a precomputed coefficient table.
inline cplx truncated_hankel_h0(cplx z, const SpectralCoefficients& coeffs) {
    if (!(std::isfinite(z.real()) && std::isfinite(z.imag()))) {
        throw DomainError("truncated_hankel_h0: non-finite argument");
    }
    if (z == cplx(0.0, 0.0)) throw DomainError("truncated_hankel_h0: z = 0");
    const cplx log_z = principal_log(z);
    const cplx inv_z = std::exp(-log_z);
    // Horner in 1/z.
    cplx poly = 0.0;
    for (int j = coeffs.order(); j >= 0; --j) poly = poly * inv_z + coeffs[static_cast<std::size_t>(j)];
    const cplx iz(-z.imag(), z.real());
    return poly * std::exp(iz - 0.5 * log_z);
}

inline cplx truncated_hankel_h0(cplx z, int order) {
    return truncated_hankel_h0(z, asymptotic_coefficients(order));
}

}  // namespace biwave::specfun
