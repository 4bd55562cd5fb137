#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "biwave/error.hpp"

namespace biwave {

template <int Dim>
using Point = std::array<double, Dim>;

template <int Dim>
using Index = std::array<long, Dim>;

template <int Dim>
inline double distance(const Point<Dim>& a, const Point<Dim>& b) {
    double s = 0.0;
    for (int d = 0; d < Dim; ++d) {
        const double t = a[d] - b[d];
        s += t * t;
    }
    return std::sqrt(s);
}

/// Axis-aligned box [lower, upper].
template <int Dim>
struct Box {
    Point<Dim> lower{};
    Point<Dim> upper{};

    [[nodiscard]] bool contains(const Point<Dim>& p) const {
        for (int d = 0; d < Dim; ++d) {
            if (p[d] < lower[d] || p[d] > upper[d]) return false;
        }
        return true;
    }

    /// Euclidean distance from p to the box (0 inside).
    [[nodiscard]] double distance_to(const Point<Dim>& p) const {
        double s = 0.0;
        for (int d = 0; d < Dim; ++d) {
            const double t = std::max({lower[d] - p[d], 0.0, p[d] - upper[d]});
            s += t * t;
        }
        return std::sqrt(s);
    }

    [[nodiscard]] bool overlaps(const Box& o) const {
        for (int d = 0; d < Dim; ++d) {
            if (upper[d] < o.lower[d] || o.upper[d] < lower[d]) return false;
        }
        return true;
    }

    [[nodiscard]] double max_side() const {
        double s = 0.0;
        for (int d = 0; d < Dim; ++d) s = std::max(s, upper[d] - lower[d]);
        return s;
    }
};

/// Uniform rectangular lattice y_j = origin + j * spacing, j_d = 0 .. counts_d - 1.
/// Node j is paired with the cell [y_j, y_j + spacing]; linear indices are row-major
/// with the first axis slowest.
template <int Dim>
class Grid {
public:
    Grid() = default;

    Grid(Point<Dim> origin, Point<Dim> spacing, std::array<std::size_t, Dim> counts)
        : origin_(origin), spacing_(spacing), counts_(counts) {
        for (int d = 0; d < Dim; ++d) {
            if (!(spacing_[d] > 0.0) || !std::isfinite(spacing_[d])) {
                throw ConfigError("Grid: spacing must be positive on every axis");
            }
            if (counts_[d] < 2) throw ConfigError("Grid: at least two nodes per axis are required");
        }
    }

    /// Lattice covering [lower, upper]^Dim with `intervals` cells per axis (intervals + 1 nodes).
    static Grid covering(const Box<Dim>& box, std::size_t intervals) {
        if (intervals < 1) throw ConfigError("Grid::covering: intervals must be >= 1");
        Point<Dim> spacing{};
        std::array<std::size_t, Dim> counts{};
        for (int d = 0; d < Dim; ++d) {
            const double side = box.upper[d] - box.lower[d];
            if (!(side > 0.0)) throw ConfigError("Grid::covering: degenerate box");
            spacing[d] = side / static_cast<double>(intervals);
            counts[d] = intervals + 1;
        }
        return Grid(box.lower, spacing, counts);
    }

    [[nodiscard]] const Point<Dim>& origin() const { return origin_; }
    [[nodiscard]] const Point<Dim>& spacing() const { return spacing_; }
    [[nodiscard]] const std::array<std::size_t, Dim>& counts() const { return counts_; }

    [[nodiscard]] std::size_t size() const {
        std::size_t n = 1;
        for (auto c : counts_) n *= c;
        return n;
    }

    /// |I_j|, the same for every cell.
    [[nodiscard]] double cell_area() const {
        double a = 1.0;
        for (auto h : spacing_) a *= h;
        return a;
    }

    [[nodiscard]] Index<Dim> unravel(std::size_t linear) const {
        Index<Dim> j{};
        for (int d = Dim - 1; d >= 0; --d) {
            j[d] = static_cast<long>(linear % counts_[d]);
            linear /= counts_[d];
        }
        return j;
    }

    [[nodiscard]] std::size_t ravel(const Index<Dim>& j) const {
        std::size_t linear = 0;
        for (int d = 0; d < Dim; ++d) linear = linear * counts_[d] + static_cast<std::size_t>(j[d]);
        return linear;
    }

    [[nodiscard]] Point<Dim> node(const Index<Dim>& j) const {
        Point<Dim> p{};
        for (int d = 0; d < Dim; ++d) p[d] = origin_[d] + static_cast<double>(j[d]) * spacing_[d];
        return p;
    }

    [[nodiscard]] Point<Dim> node(std::size_t linear) const { return node(unravel(linear)); }

    /// Box spanned by the nodes.
    [[nodiscard]] Box<Dim> bounds() const {
        Box<Dim> b;
        b.lower = origin_;
        for (int d = 0; d < Dim; ++d) {
            b.upper[d] = origin_[d] + static_cast<double>(counts_[d] - 1) * spacing_[d];
        }
        return b;
    }

private:
    Point<Dim> origin_{};
    Point<Dim> spacing_{};
    std::array<std::size_t, Dim> counts_{};
};

}  // namespace biwave
