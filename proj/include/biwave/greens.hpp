#pragma once

// Outgoing fundamental solutions of the biharmonic wave operator Delta^2 - k^4
// (normalized so that (Delta^2 - k^4) Phi = -delta) in two and three dimensions.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>

#include "biwave/error.hpp"
#include "biwave/specfun.hpp"

namespace biwave::greens {

using cplx = std::complex<double>;

/// Truncation order of the two-dimensional kernel used by the forward solver.
inline constexpr int forward_truncation_order = 3;

namespace detail {

inline void check_rk(double r, double k, const char* fn) {
    if (!std::isfinite(r) || !std::isfinite(k)) throw DomainError(std::string(fn) + ": non-finite input");
    if (r < 0.0) throw DomainError(std::string(fn) + ": r must be >= 0");
    if (!(k > 0.0)) throw DomainError(std::string(fn) + ": k must be > 0");
}

}  // namespace detail

/// (e^{ikr} - e^{-kr}) / (8 pi k^2 r); (1+i)/(8 pi k) at r = 0.
inline cplx phi_3d(double r, double k) {
    detail::check_rk(r, k, "phi_3d");
    const double kr = k * r;
    if (r == 0.0) return cplx(1.0, 1.0) / (8.0 * std::numbers::pi * k);
    // e^{ikr} - e^{-kr} = (cos kr - 1) + i sin kr - expm1(-kr), without cancellation at small kr.
    const double half_sin = std::sin(0.5 * kr);
    const cplx numer(-2.0 * half_sin * half_sin - std::expm1(-kr), std::sin(kr));
    return numer / (8.0 * std::numbers::pi * k * k * r);
}

/// (i/8k^2)(H0(kr) - H0(ikr)); i/(8k^2) at r = 0.
inline cplx phi_2d(double r, double k) {
    detail::check_rk(r, k, "phi_2d");
    const double scale = 1.0 / (8.0 * k * k);
    if (r == 0.0) return {0.0, scale};
    const double kr = k * r;
    const cplx h = specfun::hankel_h0_real(kr);
    const double re = -(h.imag() + (2.0 / std::numbers::pi) * specfun::macdonald_k0(kr));
    return {re * scale, h.real() * scale};
}

template <int Dim>
inline cplx phi(double r, double k) {
    static_assert(Dim == 2 || Dim == 3);
    if constexpr (Dim == 2) {
        return phi_2d(r, k);
    } else {
        return phi_3d(r, k);
    }
}

/// Green's functions (Phi_plus, Phi_minus) of Delta + k^2 and Delta - k^2, with
/// Phi = (Phi_plus - Phi_minus) / (2k^2).
inline std::pair<cplx, cplx> helmholtz_components(double r, double k, int dim) {
    detail::check_rk(r, k, "helmholtz_components");
    if (r == 0.0) throw DomainError("helmholtz_components: r must be > 0");
    const double kr = k * r;
    if (dim == 3) {
        const double c = 1.0 / (4.0 * std::numbers::pi * r);
        return {c * cplx(std::cos(kr), std::sin(kr)), cplx(c * std::exp(-kr), 0.0)};
    }
    if (dim == 2) {
        const cplx plus = cplx(0.0, 0.25) * specfun::hankel_h0_real(kr);
        const cplx minus(specfun::macdonald_k0(kr) / (2.0 * std::numbers::pi), 0.0);
        return {plus, minus};
    }
    throw DomainError("helmholtz_components: dim must be 2 or 3");
}

/// (i/8k^2)(H0,N(kr) - H0,N(ikr)) with the N-term asymptotic expansion.
inline cplx truncated_phi_2d(double r, double k, const specfun::SpectralCoefficients& coeffs) {
    detail::check_rk(r, k, "truncated_phi_2d");
    if (r == 0.0) throw DomainError("truncated_phi_2d: the truncated kernel diverges at r = 0");
    const double kr = k * r;
    const cplx diff = specfun::truncated_hankel_h0(cplx(kr, 0.0), coeffs)
                      - specfun::truncated_hankel_h0(cplx(0.0, kr), coeffs);
    return cplx(0.0, 1.0 / (8.0 * k * k)) * diff;
}

inline cplx truncated_phi_2d(double r, double k, int order) {
    return truncated_phi_2d(r, k, specfun::asymptotic_coefficients(order));
}

/// Real kernel of the modified integral equation,
/// G = (Y0(kr) + (2/pi)K0(kr))^2 - J0(kr)^2; -1 at r = 0.
inline double measurement_kernel_g(double r, double k) {
    detail::check_rk(r, k, "measurement_kernel_g");
    if (r == 0.0) return -1.0;
    const double kr = k * r;
    const cplx h = specfun::hankel_h0_real(kr);
    const double s = h.imag() + (2.0 / std::numbers::pi) * specfun::macdonald_k0(kr);
    return s * s - h.real() * h.real();
}

/// Kernel of the raw magnitude data, |H0(kr) - H0(ikr)|^2 = (Y0 + (2/pi)K0)^2 + J0^2; 1 at r = 0.
inline double magnitude_kernel(double r, double k) {
    detail::check_rk(r, k, "magnitude_kernel");
    if (r == 0.0) return 1.0;
    const double kr = k * r;
    const cplx h = specfun::hankel_h0_real(kr);
    const double s = h.imag() + (2.0 / std::numbers::pi) * specfun::macdonald_k0(kr);
    return s * s + h.real() * h.real();
}

}  // namespace biwave::greens
