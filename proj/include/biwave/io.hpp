#pragma once

// CSV tables and 16-bit PGM heatmaps. Doubles are written with max_digits10 so a
// table read back reproduces the in-memory values exactly.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "biwave/error.hpp"
#include "biwave/estimators.hpp"
#include "biwave/forward.hpp"
#include "biwave/grid.hpp"
#include "biwave/inverse.hpp"

namespace biwave::io {

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    return out;
}

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

inline double to_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError(where + ": not a number: '" + s + "'");
    }
}

}  // namespace detail

template <int Dim>
inline void write_waves(std::ostream& out, const WaveSampleSet& w) {
    out << "receiver_idx,path,k,re_u,im_u\n";
    for (std::size_t r = 0; r < w.receivers; ++r) {
        for (std::size_t p = 0; p < w.paths; ++p) {
            for (std::size_t f = 0; f < w.frequencies.size(); ++f) {
                const auto& u = w.at(r, p, f);
                out << r << ',' << p << ',' << w.frequencies[f] << ',' << u.real() << ',' << u.imag() << '\n';
            }
        }
    }
}

/// i1, i2 are the lattice indices of the receiver inside its domain.
inline void write_measurements(std::ostream& out, const MeasurementTable& t, const ReceiverSet<2>& receivers) {
    out << "i1,i2,x1,x2,k,M,stderr\n";
    for (std::size_t r = 0; r < t.receivers; ++r) {
        for (std::size_t f = 0; f < t.frequencies.size(); ++f) {
            out << receivers.lattice[r][0] << ',' << receivers.lattice[r][1] << ',' << receivers.points[r][0] << ','
                << receivers.points[r][1] << ',' << t.frequencies[f] << ',' << t.value(r, f) << ','
                << t.standard_error(r, f) << '\n';
        }
    }
}

/// Reads a table written by write_measurements; rows must follow the receiver order of
/// `receivers` with frequency fastest.
inline MeasurementTable read_measurements(const std::string& path, const ReceiverSet<2>& receivers,
                                          MeasurementKind kind = MeasurementKind::Difference) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "i1,i2,x1,x2,k,M,stderr") {
        throw InputError(path + ":1: expected header i1,i2,x1,x2,k,M,stderr");
    }
    struct Row {
        double x1, x2, k, m, se;
    };
    std::vector<Row> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto where = path + ":" + std::to_string(lineno);
        const auto c = detail::split(line);
        if (c.size() != 7) throw InputError(where + ": expected 7 columns");
        rows.push_back({detail::to_double(c[2], where), detail::to_double(c[3], where), detail::to_double(c[4], where),
                        detail::to_double(c[5], where), detail::to_double(c[6], where)});
    }
    if (rows.empty() || rows.size() % receivers.size() != 0) {
        throw InputError(path + ": row count does not match the receiver set");
    }
    MeasurementTable t;
    t.kind = kind;
    t.receivers = receivers.size();
    const std::size_t nf = rows.size() / receivers.size();
    for (std::size_t f = 0; f < nf; ++f) t.frequencies.push_back(rows[f].k);
    t.values.resize(rows.size());
    t.std_errors.resize(rows.size());
    for (std::size_t r = 0; r < receivers.size(); ++r) {
        for (std::size_t f = 0; f < nf; ++f) {
            const auto& row = rows[r * nf + f];
            const auto& x = receivers.points[r];
            if (std::abs(row.x1 - x[0]) > 1e-9 || std::abs(row.x2 - x[1]) > 1e-9 || row.k != t.frequencies[f]) {
                throw InputError(path + ":" + std::to_string(r * nf + f + 2) + ": receiver/frequency out of order");
            }
            t.values[t.index(r, f)] = row.m;
            t.std_errors[t.index(r, f)] = row.se;
        }
    }
    return t;
}

template <int Dim>
inline void write_ergodic(std::ostream& out, const ReceiverSet<Dim>& receivers, const std::vector<double>& td_hat,
                          const std::vector<double>& td_ref) {
    out << (Dim == 2 ? "x1,x2" : "x1,x2,x3") << ",Td_hat,Td_ref,ratio\n";
    for (std::size_t r = 0; r < receivers.size(); ++r) {
        for (int d = 0; d < Dim; ++d) out << receivers.points[r][d] << ',';
        out << td_hat[r] << ',' << td_ref[r] << ',' << td_hat[r] / td_ref[r] << '\n';
    }
}

inline void write_reconstruction(std::ostream& out, const Grid<2>& grid, const std::vector<double>& truth,
                                 const Eigen::VectorXd& q) {
    out << "j1,j2,y1,y2,mu_true,mu_rec\n";
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto idx = grid.unravel(j);
        const auto y = grid.node(j);
        out << idx[0] << ',' << idx[1] << ',' << y[0] << ',' << y[1] << ',' << truth[j] << ','
            << q(static_cast<Eigen::Index>(j)) << '\n';
    }
}

inline void write_residuals(std::ostream& out, const std::vector<ResidualRecord>& history) {
    out << "sweep,frequency,residual\n";
    for (const auto& h : history) out << h.sweep << ',' << h.k << ',' << h.residual << '\n';
}

/// Binary 16-bit PGM, min-max normalized; the first axis of the grid runs left to right and
/// the second bottom to top. The comment line records the value range.
inline void write_pgm(std::ostream& out, const Grid<2>& grid, const std::vector<double>& values) {
    if (values.size() != grid.size()) throw ConfigError("write_pgm: size mismatch");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const std::size_t w = grid.counts()[0];
    const std::size_t h = grid.counts()[1];
    std::ostringstream header;
    header << std::setprecision(std::numeric_limits<double>::max_digits10);
    header << "P5\n# min " << lo << " max " << hi << "\n" << w << ' ' << h << "\n65535\n";
    out << header.str();
    for (std::size_t row = 0; row < h; ++row) {
        const long j2 = static_cast<long>(h - 1 - row);
        for (std::size_t col = 0; col < w; ++col) {
            const double v = values[grid.ravel({static_cast<long>(col), j2})];
            const double s = hi > lo ? (v - lo) / (hi - lo) : 0.0;
            const auto level = static_cast<std::uint16_t>(std::lround(std::clamp(s, 0.0, 1.0) * 65535.0));
            out.put(static_cast<char>(level >> 8));
            out.put(static_cast<char>(level & 0xff));
        }
    }
}

inline void save(const std::string& path, const auto& writer) {
    auto out = detail::open_out(path);
    writer(out);
    if (!out) throw InputError("write failed: " + path);
}

}  // namespace biwave::io
