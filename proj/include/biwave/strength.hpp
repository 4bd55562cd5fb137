#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "biwave/error.hpp"
#include "biwave/grid.hpp"

namespace biwave {

/// a * exp(-rate * |y - center|^2). Example 1 is amplitude 4, rate 4, centered at the origin.
template <int Dim>
struct GaussianBump {
    double amplitude = 4.0;
    double rate = 4.0;
    Point<Dim> center{};
};

/// mu(y) = mu~(3 y1, 3 y2) with the three-term peaks-type profile; negative on parts of D.
struct PeaksProfile {};

template <int Dim>
struct ConstantStrength {
    double value = 1.0;
};

/// Nodal values on a 2D lattice, bilinearly interpolated.
struct TabulatedStrength {
    Grid<2> grid;
    std::vector<double> values;
};

template <int Dim>
class StrengthField {
public:
    using Definition = std::variant<GaussianBump<Dim>, PeaksProfile, ConstantStrength<Dim>, TabulatedStrength>;

    StrengthField(Definition def, Box<Dim> support, bool clamp = true)
        : def_(std::move(def)), support_(support), clamp_(clamp) {
        if constexpr (Dim != 2) {
            if (std::holds_alternative<PeaksProfile>(def_) || std::holds_alternative<TabulatedStrength>(def_)) {
                throw ConfigError("StrengthField: peaks and tabulated profiles are two-dimensional");
            }
        }
        if (const auto* t = std::get_if<TabulatedStrength>(&def_)) {
            if (t->values.size() != t->grid.size()) throw ConfigError("StrengthField: tabulated size mismatch");
        }
    }

    static Box<Dim> unit_domain() {
        Box<Dim> b;
        for (int d = 0; d < Dim; ++d) {
            b.lower[d] = -1.0;
            b.upper[d] = 1.0;
        }
        return b;
    }

    static StrengthField example1() { return StrengthField(GaussianBump<Dim>{}, unit_domain()); }
    static StrengthField example2(bool clamp = true) { return StrengthField(PeaksProfile{}, unit_domain(), clamp); }
    static StrengthField constant(double v) { return StrengthField(ConstantStrength<Dim>{v}, unit_domain()); }

    [[nodiscard]] const Definition& definition() const { return def_; }
    [[nodiscard]] const Box<Dim>& support() const { return support_; }
    [[nodiscard]] bool clamped() const { return clamp_; }

    /// mu(y); zero outside the support box, and max(mu, 0) when clamping.
    [[nodiscard]] double operator()(const Point<Dim>& y) const {
        if (!support_.contains(y)) return 0.0;
        const double v = std::visit([&](const auto& d) { return raw(d, y); }, def_);
        return clamp_ ? std::max(v, 0.0) : v;
    }

    /// Values at every grid node, in the grid's linear order.
    [[nodiscard]] std::vector<double> sample(const Grid<Dim>& grid) const {
        std::vector<double> out(grid.size());
        for (std::size_t j = 0; j < out.size(); ++j) out[j] = (*this)(grid.node(j));
        return out;
    }

private:
    static double raw(const GaussianBump<Dim>& g, const Point<Dim>& y) {
        double r2 = 0.0;
        for (int d = 0; d < Dim; ++d) r2 += (y[d] - g.center[d]) * (y[d] - g.center[d]);
        return g.amplitude * std::exp(-g.rate * r2);
    }

    static double raw(const PeaksProfile&, const Point<Dim>& y) {
        if constexpr (Dim == 2) {
            const double a = 3.0 * y[0];
            const double b = 3.0 * y[1];
            return 0.3 * (1.0 - a) * (1.0 - a) * std::exp(-a * a - (b + 1.0) * (b + 1.0))
                   - (0.2 * a - a * a * a - std::pow(b, 5)) * std::exp(-a * a - b * b)
                   - 0.03 * std::exp(-(a + 1.0) * (a + 1.0) - b * b);
        } else {
            return 0.0;
        }
    }

    static double raw(const ConstantStrength<Dim>& c, const Point<Dim>&) { return c.value; }

    static double raw(const TabulatedStrength& t, const Point<Dim>& y) {
        if constexpr (Dim == 2) {
            const auto& g = t.grid;
            std::array<long, 2> j{};
            std::array<double, 2> w{};
            for (int d = 0; d < 2; ++d) {
                const double s = (y[d] - g.origin()[d]) / g.spacing()[d];
                const long n = static_cast<long>(g.counts()[d]) - 1;
                long i = static_cast<long>(std::floor(s));
                i = std::clamp(i, 0L, n - 1);
                j[d] = i;
                w[d] = std::clamp(s - static_cast<double>(i), 0.0, 1.0);
            }
            auto at = [&](long a, long b) { return t.values[g.ravel({a, b})]; };
            return (1 - w[0]) * (1 - w[1]) * at(j[0], j[1]) + w[0] * (1 - w[1]) * at(j[0] + 1, j[1])
                   + (1 - w[0]) * w[1] * at(j[0], j[1] + 1) + w[0] * w[1] * at(j[0] + 1, j[1] + 1);
        } else {
            return 0.0;
        }
    }

    Definition def_;
    Box<Dim> support_;
    bool clamp_ = true;
};

/// Reads `j1,j2,y1,y2,mu` rows (row-major over the lattice) into a tabulated field.
inline StrengthField<2> load_tabulated_strength(const std::string& path, bool clamp = true) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open strength table: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty strength table: " + path);
    if (line.rfind("j1,j2,y1,y2,mu", 0) != 0) {
        throw ConfigError(path + ":1: expected header j1,j2,y1,y2,mu");
    }
    struct Row {
        long j1, j2;
        double y1, y2, mu;
    };
    std::vector<Row> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        Row r{};
        if (!(ss >> r.j1 >> r.j2 >> r.y1 >> r.y2 >> r.mu)) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed row");
        }
        rows.push_back(r);
    }
    long n1 = 0;
    long n2 = 0;
    for (const auto& r : rows) {
        n1 = std::max(n1, r.j1 + 1);
        n2 = std::max(n2, r.j2 + 1);
    }
    if (n1 < 2 || n2 < 2 || rows.size() != static_cast<std::size_t>(n1 * n2)) {
        throw ConfigError(path + ": table is not a complete lattice");
    }
    const Row* origin = nullptr;
    const Row* next1 = nullptr;
    const Row* next2 = nullptr;
    for (const auto& r : rows) {
        if (r.j1 == 0 && r.j2 == 0) origin = &r;
        if (r.j1 == 1 && r.j2 == 0) next1 = &r;
        if (r.j1 == 0 && r.j2 == 1) next2 = &r;
    }
    if (!origin || !next1 || !next2) throw ConfigError(path + ": missing lattice corner rows");
    Grid<2> grid({origin->y1, origin->y2}, {next1->y1 - origin->y1, next2->y2 - origin->y2},
                 {static_cast<std::size_t>(n1), static_cast<std::size_t>(n2)});
    TabulatedStrength tab{grid, std::vector<double>(grid.size(), 0.0)};
    for (const auto& r : rows) tab.values[grid.ravel({r.j1, r.j2})] = r.mu;
    return StrengthField<2>(std::move(tab), grid.bounds(), clamp);
}

}  // namespace biwave
