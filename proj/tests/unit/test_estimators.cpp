#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "biwave/estimators.hpp"
#include "biwave/forward.hpp"

using namespace biwave;
using cplx = std::complex<double>;

namespace {

Grid<2> paper_grid() { return Grid<2>::covering(Box<2>{{-1, -1}, {1, 1}}, 20); }
Grid<3> cube_grid(std::size_t n) { return Grid<3>::covering(Box<3>{{-1, -1, -1}, {1, 1, 1}}, n); }

double g_oracle(double r, double k) {
    const double x = k * r;
    const double s = std::cyl_neumann(0.0, x) + 2.0 / std::numbers::pi * std::cyl_bessel_k(0.0, x);
    const double j = std::cyl_bessel_j(0.0, x);
    return s * s - j * j;
}

WaveSampleSet one_path(const std::vector<double>& ks, const std::vector<cplx>& u) {
    WaveSampleSet s;
    s.frequencies = ks;
    s.receivers = 1;
    s.paths = 1;
    s.values = u;
    return s;
}

double mean_stderr(const MeasurementTable& t) {
    double s = 0;
    for (double v : t.std_errors) s += v;
    return s / t.std_errors.size();
}

}  // namespace

TEST(MeasurementMc, ZeroSamples) {
    WaveSampleSet s;
    s.frequencies = {1.0, 2.0};
    s.receivers = 3;
    s.paths = 4;
    s.values.assign(24, cplx(0.0));
    const auto t = measurement_mc(s);
    for (double v : t.values) EXPECT_EQ(v, 0.0);
    for (double v : t.std_errors) EXPECT_EQ(v, 0.0);
}

TEST(MeasurementMc, Preconditions) {
    WaveSampleSet s;
    s.frequencies = {1.0};
    s.receivers = 1;
    s.paths = 1;
    s.values.assign(1, cplx(0.0));
    EXPECT_THROW(measurement_mc(s), ConfigError);
    s.paths = 2;
    EXPECT_THROW(measurement_mc(s), ConfigError);
}

TEST(MeasurementMc, SingleCellLimitIsAreaTimesG) {
    const double area = 0.01;
    for (double r : {0.8, 2.3}) {
        for (double k : {1.0, 2.0, 5.0}) {
            const cplx phi = greens::phi_2d(r, k);
            // Exact expectation of one Ito term.
            const double exact = 64 * std::pow(k, 4) * area * (phi.real() * phi.real() - phi.imag() * phi.imag());
            EXPECT_NEAR(exact, area * g_oracle(r, k), 1e-12 * area * std::max(1.0, std::abs(g_oracle(r, k))));

            const std::size_t paths = 100000;
            WaveSampleSet s;
            s.frequencies = {k};
            s.receivers = 1;
            s.paths = paths;
            std::mt19937_64 rng(17);
            std::normal_distribution<double> nd;
            for (std::size_t p = 0; p < paths; ++p) s.values.push_back(-phi * std::sqrt(area) * nd(rng));
            const auto t = measurement_mc(s);
            EXPECT_LE(std::abs(t.value(0, 0) - area * g_oracle(r, k)), 4 * t.standard_error(0, 0));
        }
    }
}

TEST(MeasurementMc, Example1AgainstQuadrature) {
    const auto g = paper_grid();
    const auto f = StrengthField<2>::example1();
    const auto rs = standard_receivers(10);
    const std::vector<double> ks = {2.0};
    const auto t = measurement_mc(sweep<2>(rs, ks, f, g, 1000, 20240601));
    const auto expect = expected_measurement(rs, ks, f, g);
    const auto mu = f.sample(g);
    std::size_t within = 0;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        double oracle = 0;
        for (std::size_t j = 0; j < g.size(); ++j) oracle += g.cell_area() * g_oracle(distance<2>(rs.points[i], g.node(j)), 2.0) * mu[j];
        EXPECT_NEAR(expect.value(i, 0), oracle, 1e-12 * std::abs(oracle));
        if (std::abs(t.value(i, 0) - oracle) <= 3 * t.standard_error(i, 0)) ++within;
    }
    EXPECT_GE(within, static_cast<std::size_t>(std::ceil(0.95 * rs.size())));
}

TEST(MeasurementMc, StreamingMatchesSweep) {
    const auto g = paper_grid();
    const auto f = StrengthField<2>::example2();
    const auto rs = standard_receivers(6);
    const std::vector<double> ks = {1.0, 3.0};
    const auto samples = sweep<2>(rs, ks, f, g, 50, 8);
    const auto pair = synthesize_measurements<2>(rs, ks, f, g, 50, 8);
    const auto diff = measurement_mc(samples, MeasurementKind::Difference);
    const auto mag = measurement_mc(samples, MeasurementKind::Magnitude);
    for (std::size_t i = 0; i < diff.values.size(); ++i) {
        EXPECT_NEAR(pair.difference.values[i], diff.values[i], 1e-10 * mag.values[i]);
        EXPECT_NEAR(pair.magnitude.values[i], mag.values[i], 1e-10 * mag.values[i]);
        EXPECT_NEAR(pair.difference.std_errors[i], diff.std_errors[i], 1e-8 * diff.std_errors[i]);
    }
}

TEST(MeasurementMc, StandardErrorScaling) {
    const auto g = paper_grid();
    const auto f = StrengthField<2>::example1();
    const auto rs = standard_receivers(4);
    const std::vector<double> ks = {2.0};
    const double se1 = mean_stderr(synthesize_measurements<2>(rs, ks, f, g, 250, 3).difference);
    const double se2 = mean_stderr(synthesize_measurements<2>(rs, ks, f, g, 500, 3).difference);
    const double se4 = mean_stderr(synthesize_measurements<2>(rs, ks, f, g, 1000, 3).difference);
    EXPECT_NEAR(se2 / se1, 1 / std::sqrt(2.0), 0.2 / std::sqrt(2.0));
    EXPECT_NEAR(se4 / se1, 0.5, 0.1);
}

TEST(BandAverage, Constant) {
    const auto ks = band_frequencies(7.0, 200);
    EXPECT_DOUBLE_EQ(ks.front(), 7.0);
    EXPECT_DOUBLE_EQ(ks.back(), 14.0);
    const cplx c(0.3, -1.2);
    const auto e = ergodic_average(one_path(ks, std::vector<cplx>(ks.size(), c)), -5.0, 2);
    EXPECT_EQ(e.exponent, 0.0);
    EXPECT_NEAR(e.values[0], std::norm(c), 1e-14);
}

TEST(BandAverage, InverseK) {
    const auto ks = band_frequencies(1.0, 200);
    std::vector<cplx> u;
    for (double k : ks) u.emplace_back(1.0 / k, 0.0);
    const auto e = ergodic_average(one_path(ks, u), -4.0, 3);
    EXPECT_EQ(e.exponent, 0.0);
    EXPECT_NEAR(e.values[0], 0.5, 1e-4);
}

TEST(BandAverage, ExponentEcho) {
    EXPECT_EQ(ergodic_exponent(0.0, 3), 4.0);
    EXPECT_EQ(ergodic_exponent(0.0, 2), 5.0);
    EXPECT_EQ(ergodic_exponent(1.5, 3), 5.5);
    EXPECT_EQ(ergodic_exponent(-1.0, 2), 4.0);
    EXPECT_THROW(ergodic_exponent(0.0, 4), ConfigError);
}

TEST(BandAverage, Errors) {
    const std::vector<double> short_band = {1.0, 1.5, 1.9};
    const std::vector<double> g(3, 1.0);
    EXPECT_THROW(band_average(short_band, g, 0.0), ConfigError);
    EXPECT_THROW(band_average(std::vector<double>{1.0, 0.5, 2.0}, g, 0.0), ConfigError);
    EXPECT_THROW(band_frequencies(0.0, 10), ConfigError);
    EXPECT_THROW(band_frequencies(1.0, 1), ConfigError);
    EXPECT_THROW(ergodic_average(one_path({1.0, 2.0}, {1.0, 1.0}), 0.0, 3, 1), ConfigError);
}

TEST(BandAverage, LinearAndRefinementInvariant) {
    auto g = [](double k) { return std::exp(-0.1 * k) * (1.0 + 0.3 * std::sin(k)); };
    auto avg = [&](std::size_t n, double scale) {
        const auto ks = band_frequencies(10.0, n);
        std::vector<double> v;
        for (double k : ks) v.push_back(scale * g(k));
        return band_average(ks, v, 4.0);
    };
    const double a400 = avg(400, 1.0);
    EXPECT_LE(std::abs(avg(800, 1.0) - a400), 0.005 * std::abs(a400));
    EXPECT_LE(std::abs(avg(1600, 1.0) - a400), 0.005 * std::abs(a400));
    EXPECT_NEAR(avg(400, 3.5), 3.5 * a400, 1e-12 * std::abs(a400));
}

TEST(BandAverage, FullVersusTruncatedAtT20) {
    const auto g = paper_grid();
    const auto f = StrengthField<2>::example1();
    ReceiverSet<2> rs;
    for (const auto& x : std::vector<Point<2>>{{2, 2}, {2, -2}, {-2.5, -2}, {-1.5, 2.5}}) rs.add(x, 1);
    for (double t : {20.0, 40.0}) {
        const auto ks = band_frequencies(t, 200);
        const auto u = sweep<2>(rs, ks, f, g, 1, 20240601, KernelKind::Full);
        const auto u3 = sweep<2>(rs, ks, f, g, 1, 20240601, KernelKind::Truncated);
        const auto e = ergodic_average(u, 0.0, 2);
        const auto e3 = ergodic_average(u3, 0.0, 2);
        for (std::size_t r = 0; r < rs.size(); ++r) {
            EXPECT_LE(std::abs(e.values[r] - e3.values[r]), 0.02 * e.values[r]) << "T " << t << " receiver " << r;
        }
    }
}

TEST(ReferenceTd, ZeroStrength) {
    EXPECT_EQ(reference_td<2>({2.0, 2.0}, StrengthField<2>::constant(0.0), paper_grid()), 0.0);
}

TEST(ReferenceTd, PointMass3d) {
    const auto g = cube_grid(10);
    const std::size_t j0 = 500;
    const auto z = g.node(j0);
    const StrengthField<3> f(GaussianBump<3>{1.0 / g.cell_area(), 1e6, z}, g.bounds());
    for (const Point<3>& x : {Point<3>{2, 0, 0}, Point<3>{-1.5, 2, 3}}) {
        const double d = distance<3>(x, z);
        const double expect = 1.0 / (64 * std::numbers::pi * std::numbers::pi * d * d);
        EXPECT_NEAR(reference_td<3>(x, f, g), expect, 1e-12 * expect);
    }
    EXPECT_THROW(reference_td<3>(Point<3>{0.5, 0, 0}, f, g), PreconditionError);
}

TEST(ReferenceTd, Example1AgainstAdaptiveQuadrature) {
    using boost::math::quadrature::gauss_kronrod;
    const Point<2> x{2.0, 2.0};
    auto inner = [&](double z1) {
        auto fz = [&](double z2) {
            return 4 * std::exp(-4 * (z1 * z1 + z2 * z2)) / std::hypot(x[0] - z1, x[1] - z2);
        };
        return gauss_kronrod<double, 31>::integrate(fz, -1.0, 1.0, 15, 1e-12);
    };
    const double oracle = gauss_kronrod<double, 31>::integrate(inner, -1.0, 1.0, 15, 1e-12) / (32 * std::numbers::pi);
    const double td = reference_td<2>(x, StrengthField<2>::example1(), paper_grid());
    EXPECT_NEAR(td / oracle, 1.0, 0.005) << "td " << td << " oracle " << oracle;
    EXPECT_DOUBLE_EQ(td_constant(2), 1 / (32 * std::numbers::pi));
    EXPECT_DOUBLE_EQ(td_constant(3), 1 / (64 * std::numbers::pi * std::numbers::pi));
}

TEST(VarianceAsymptotics, DegenerateReport) {
    const auto g = paper_grid();
    const auto f = StrengthField<2>::constant(0.0);
    const auto rs = standard_receivers(2);
    const std::vector<double> ks = {20.0, 40.0};
    const auto samples = sweep<2>(rs, ks, f, g, 4, 1, KernelKind::Truncated);
    const auto rep = variance_asymptotics_check<2>(samples, rs, f, g, 0.0, KernelKind::Truncated);
    EXPECT_TRUE(rep.degenerate);
    for (const auto& row : rep.ratios) {
        for (const auto& mr : row) EXPECT_TRUE(std::isnan(mr.mc_ratio));
    }
}

TEST(VarianceAsymptotics, ThreeDimensionalRatios) {
    const auto g = cube_grid(10);
    const auto f = StrengthField<3>::example1();
    ReceiverSet<3> rs;
    rs.add({2.0, 0.0, 0.0}, 1);
    rs.add({0.0, -2.5, 1.0}, 1);
    const std::vector<double> ks = {20.0, 40.0, 80.0};
    const auto samples = sweep<3>(rs, ks, f, g, 500, 21);
    const auto rep = variance_asymptotics_check<3>(samples, rs, f, g, 0.0);
    ASSERT_FALSE(rep.degenerate);
    const auto mu = f.sample(g);
    for (std::size_t r = 0; r < rs.size(); ++r) {
        double prev = 1e300;
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const auto& mr = rep.ratios[r][i];
            double model = 0;
            for (std::size_t j = 0; j < g.size(); ++j) {
                model += std::norm(greens::phi_3d(distance<3>(rs.points[r], g.node(j)), ks[i])) * mu[j] * g.cell_area();
            }
            model *= std::pow(ks[i], 4) / rep.td[r];
            EXPECT_NEAR(mr.model_ratio, model, 1e-12);
            EXPECT_LE(std::abs(mr.mc_ratio - mr.model_ratio), 4 * mr.mc_stderr);
            EXPECT_LE(std::abs(mr.model_ratio - 1.0), prev + 1e-12);
            prev = std::abs(mr.model_ratio - 1.0);
        }
        EXPECT_TRUE(std::isfinite(rep.drift_slope[r]));
    }
}

TEST(VarianceAsymptotics, TwoDimensionalTruncatedRatios) {
    const auto g = paper_grid();
    const auto f = StrengthField<2>::example1();
    const auto rs = standard_receivers(2);
    const std::vector<double> ks = {20.0, 40.0, 80.0};
    const auto samples = sweep<2>(rs, ks, f, g, 1000, 5, KernelKind::Truncated);
    const auto rep = variance_asymptotics_check<2>(samples, rs, f, g, 0.0, KernelKind::Truncated);
    for (std::size_t r = 0; r < rs.size(); ++r) {
        for (const auto& mr : rep.ratios[r]) {
            EXPECT_LE(std::abs(mr.mc_ratio - mr.model_ratio), 4 * mr.mc_stderr);
            EXPECT_NEAR(mr.model_ratio, 1.0, 0.05);
        }
    }
}
