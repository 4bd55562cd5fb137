#pragma once

// Leading singular term of the covariance kernel K_f(x, y) of an order -m
// microlocally isotropic field, classified by the Hurst parameter H = (m - d)/2.

#include <cmath>
#include <numbers>
#include <vector>

#include "biwave/error.hpp"

namespace biwave {

enum class KernelCase {
    LogPower,        // (i)   H a nonnegative integer: C1 |x-y|^{2H} ln|x-y|
    Power,           // (ii)  m > 0: C2 |x-y|^{2H}
    RenormalizedPower,  // (iii) m in (-2n-2, -2n): C2 |x-y|^{2H}[1 - sum_j c_j |x-y|^{2j} Delta^j delta]
    DeltaDerivative  // (iv)  m = -2n: (-Delta)^n delta
};

struct KernelConstant {
    KernelCase kind = KernelCase::Power;
    double constant = 0.0;     // C1, C2, or 1 for the delta case
    int n = 0;                 // n of cases (iii)/(iv)
    std::vector<double> c;     // c_0 .. c_n for case (iii)
};

namespace detail {

inline bool is_integer(double v) { return std::abs(v - std::round(v)) < 1e-12; }

}  // namespace detail

/// Classifies (m, d) and evaluates the leading constant. Requires m in (d - 6, d + 2).
inline KernelConstant kernel_leading_constant(double m, int d) {
    if (d != 2 && d != 3) throw DomainError("kernel_leading_constant: d must be 2 or 3");
    if (!(m > d - 6.0 && m < d + 2.0)) throw DomainError("kernel_leading_constant: m outside (d-6, d+2)");
    const double hurst = 0.5 * (m - d);
    const double pi_d2 = std::pow(std::numbers::pi, -0.5 * d);

    KernelConstant out;
    if (hurst >= 0.0 && detail::is_integer(hurst)) {
        const int h = static_cast<int>(std::lround(hurst));
        out.kind = KernelCase::LogPower;
        out.constant = ((h + 1) % 2 == 0 ? 1.0 : -1.0) * std::pow(2.0, -m + 1.0) * pi_d2
                       / (std::tgamma(h + 1.0) * std::tgamma(0.5 * m));
        return out;
    }
    if (m > 0.0) {
        out.kind = KernelCase::Power;
        out.constant = std::pow(2.0, -m) * pi_d2 * std::tgamma(-hurst) / std::tgamma(0.5 * m);
        return out;
    }
    if (detail::is_integer(0.5 * m)) {
        out.kind = KernelCase::DeltaDerivative;
        out.n = static_cast<int>(std::lround(-0.5 * m));
        out.constant = 1.0;
        return out;
    }
    // m in (-2n-2, -2n)
    out.kind = KernelCase::RenormalizedPower;
    out.n = static_cast<int>(std::floor(-0.5 * m));
    out.constant = std::pow(2.0, -m) * pi_d2 * std::tgamma(-hurst) / std::tgamma(0.5 * m);
    if (!std::isfinite(out.constant)) throw DomainError("kernel_leading_constant: Gamma pole");
    const double sphere_area = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
    out.c.push_back(1.0);
    double denom = 1.0;
    for (int j = 1; j <= out.n; ++j) {
        denom *= 2.0 * j * (d + 2.0 * j - 2.0);  // 2^j j! d(d+2)...(d+2j-2)
        out.c.push_back(sphere_area / denom);
    }
    return out;
}

}  // namespace biwave
