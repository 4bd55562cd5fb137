#pragma once

// Regularized block-Kaczmarz reconstruction of the strength mu from per-domain linear
// systems b_n = A_n q. One block update is
//
//   q <- q + A_n^T (gamma I + A_n A_n^T)^{-1} (b_n - A_n q).
//
// When a block has more rows than columns the equivalent form
// (gamma I + A_n^T A_n)^{-1} A_n^T is factored instead (smaller, same iterate).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "biwave/error.hpp"
#include "biwave/estimators.hpp"
#include "biwave/forward.hpp"
#include "biwave/greens.hpp"
#include "biwave/grid.hpp"

namespace biwave {

struct BlockSystem {
    Eigen::MatrixXd matrix;  // rows: receivers of one domain, cols: source nodes
    Eigen::VectorXd rhs;
    double k = 0.0;
    int domain = 0;
};

/// Blocks of one wavenumber, ordered by domain label.
struct FrequencyGroup {
    double k = 0.0;
    std::vector<BlockSystem> blocks;
};

struct ResidualRecord {
    std::size_t sweep = 0;  // 1-based, counted across all frequencies
    double k = 0.0;
    double residual = 0.0;  // sum_n ||b_n - A_n q||_2 over the blocks of this frequency
};

struct ReconstructionResult {
    Eigen::VectorXd q;
    std::vector<ResidualRecord> history;
    double gamma = 0.0;
    std::size_t sweeps = 0;
    std::vector<double> frequencies;
    std::uint64_t seed = 0;
};

/// |I| G(|x_i - y_j|, k) (or the magnitude kernel) for the given receiver rows, with the
/// matching measurement entries as right-hand side.
inline BlockSystem assemble_block(const ReceiverSet<2>& receivers, std::span<const std::size_t> rows,
                                  const Grid<2>& grid, double k, const MeasurementTable& table) {
    if (table.receivers != receivers.size()) throw AssemblyError("measurement table does not match receiver set");
    const long f = table.find_frequency(k);
    if (f < 0) {
        std::ostringstream msg;
        msg << "no measurements for k = " << k;
        throw AssemblyError(msg.str());
    }
    BlockSystem b;
    b.k = k;
    b.domain = rows.empty() ? 0 : receivers.domain[rows.front()];
    b.matrix.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(grid.size()));
    b.rhs.resize(static_cast<Eigen::Index>(rows.size()));
    const double area = grid.cell_area();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= receivers.size()) throw AssemblyError("receiver row out of range");
        const auto& x = receivers.points[rows[i]];
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const double r = distance<2>(x, grid.node(j));
            const double kern = table.kind == MeasurementKind::Difference ? greens::measurement_kernel_g(r, k)
                                                                          : greens::magnitude_kernel(r, k);
            b.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = area * kern;
        }
        const double v = table.value(rows[i], static_cast<std::size_t>(f));
        if (!std::isfinite(v)) throw AssemblyError("non-finite measurement entry");
        b.rhs(static_cast<Eigen::Index>(i)) = v;
    }
    return b;
}

/// One group per measured frequency (ascending), one block per domain label (ascending).
inline std::vector<FrequencyGroup> assemble_system(const ReceiverSet<2>& receivers, const Grid<2>& grid,
                                                   const MeasurementTable& table,
                                                   std::span<const double> frequencies) {
    std::vector<double> ks(frequencies.begin(), frequencies.end());
    std::sort(ks.begin(), ks.end());
    std::vector<FrequencyGroup> groups;
    for (double k : ks) {
        FrequencyGroup g{k, {}};
        for (int label : receivers.labels()) {
            const auto rows = receivers.rows_of(label);
            g.blocks.push_back(assemble_block(receivers, rows, grid, k, table));
        }
        groups.push_back(std::move(g));
    }
    return groups;
}

/// A block with its regularized Gram matrix factored once; apply() performs one update.
class RegularizedBlock {
public:
    RegularizedBlock(const BlockSystem& block, double gamma) : block_(&block) {
        if (!(gamma >= 0.0)) throw ConfigError("regularization parameter must be >= 0");
        const auto& a = block.matrix;
        row_form_ = a.rows() <= a.cols();
        if (!row_form_ && gamma == 0.0) {
            throw LinearSolveError(describe() + ": gamma = 0 with more rows than columns, gamma I + A A^T is singular");
        }
        Eigen::MatrixXd gram = row_form_ ? Eigen::MatrixXd(a * a.transpose()) : Eigen::MatrixXd(a.transpose() * a);
        gram.diagonal().array() += gamma;
        ldlt_.compute(gram);
        const Eigen::VectorXd d = ldlt_.vectorD().cwiseAbs();
        const double dmax = d.size() > 0 ? d.maxCoeff() : 0.0;
        const double dmin = d.size() > 0 ? d.minCoeff() : 0.0;
        const double tol = static_cast<double>(gram.rows()) * std::numeric_limits<double>::epsilon() * dmax;
        if (ldlt_.info() != Eigen::Success || !(dmax > 0.0) || dmin <= tol) {
            throw LinearSolveError(describe() + ": gamma I + A A^T is singular");
        }
    }

    void apply(Eigen::VectorXd& q) const {
        const auto& a = block_->matrix;
        const Eigen::VectorXd r = block_->rhs - a * q;
        if (row_form_) {
            q += a.transpose() * ldlt_.solve(r);
        } else {
            q += ldlt_.solve(a.transpose() * r);
        }
    }

    [[nodiscard]] double residual(const Eigen::VectorXd& q) const { return (block_->rhs - block_->matrix * q).norm(); }

private:
    [[nodiscard]] std::string describe() const {
        std::ostringstream s;
        s << "block U" << block_->domain << " (k = " << block_->k << ")";
        return s.str();
    }

    const BlockSystem* block_;
    bool row_form_ = true;
    Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

/// One pass n = 1..N of the regularized block update, in the given order.
inline Eigen::VectorXd kaczmarz_sweep(std::span<const BlockSystem> blocks, const Eigen::VectorXd& q_in, double gamma) {
    Eigen::VectorXd q = q_in;
    for (const auto& b : blocks) {
        if (b.matrix.cols() != q.size()) throw ConfigError("kaczmarz_sweep: block width does not match q");
        RegularizedBlock(b, gamma).apply(q);
    }
    return q;
}

/// Frequencies ascending (outer loop), `sweeps` passes over the domain blocks per
/// frequency (intermediate loop), warm-starting q across frequencies.
inline ReconstructionResult invert(std::span<const FrequencyGroup> groups, double gamma, std::size_t sweeps,
                                   const Eigen::VectorXd& q0, bool clamp_nonnegative = false) {
    if (sweeps < 1) throw ConfigError("invert: at least one sweep per frequency is required");
    if (groups.empty()) throw ConfigError("invert: no frequency groups");
    const auto width = q0.size();
    for (const auto& g : groups) {
        if (g.blocks.size() != groups.front().blocks.size()) throw ConfigError("invert: block layout differs across k");
        for (const auto& b : g.blocks) {
            if (b.matrix.cols() != width) throw ConfigError("invert: block width does not match q0");
        }
    }
    std::vector<const FrequencyGroup*> order;
    for (const auto& g : groups) order.push_back(&g);
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->k < b->k; });

    // Factor everything before iterating; the Gram matrices do not depend on q.
    std::vector<std::vector<RegularizedBlock>> factored;
    for (const auto* g : order) {
        std::vector<RegularizedBlock> fb;
        fb.reserve(g->blocks.size());
        for (const auto& b : g->blocks) fb.emplace_back(b, gamma);
        factored.push_back(std::move(fb));
    }

    ReconstructionResult res;
    res.q = q0;
    res.gamma = gamma;
    res.sweeps = sweeps;
    std::size_t sweep_no = 0;
    for (std::size_t gi = 0; gi < order.size(); ++gi) {
        res.frequencies.push_back(order[gi]->k);
        for (std::size_t l = 0; l < sweeps; ++l) {
            for (const auto& fb : factored[gi]) fb.apply(res.q);
            double total = 0.0;
            for (const auto& fb : factored[gi]) total += fb.residual(res.q);
            res.history.push_back({++sweep_no, order[gi]->k, total});
        }
    }
    if (clamp_nonnegative) res.q = res.q.cwiseMax(0.0);
    return res;
}

/// Solves T_d(x_i) = sum_j |I| c_d |x_i - y_j|^{-(d-1)} mu(y_j) for mu with one block per
/// receiver domain, starting from q = 0.
template <int Dim>
inline ReconstructionResult invert_ergodic(const ErgodicEstimate& td, const Grid<Dim>& grid,
                                           const ReceiverSet<Dim>& receivers, double gamma, std::size_t sweeps) {
    if (td.values.size() != receivers.size()) throw ConfigError("invert_ergodic: estimate/receiver size mismatch");
    receivers.require_outside(grid.bounds());
    const double c = td_constant(Dim) * grid.cell_area();
    FrequencyGroup group;
    for (int label : receivers.labels()) {
        const auto rows = receivers.rows_of(label);
        BlockSystem b;
        b.domain = label;
        b.matrix.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(grid.size()));
        b.rhs.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < grid.size(); ++j) {
                const double r = distance<Dim>(receivers.points[rows[i]], grid.node(j));
                b.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c * std::pow(r, -(Dim - 1));
            }
            b.rhs(static_cast<Eigen::Index>(i)) = td.values[rows[i]];
        }
        group.blocks.push_back(std::move(b));
    }
    const std::vector<FrequencyGroup> groups{std::move(group)};
    return invert(groups, gamma, sweeps, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size())));
}

/// ||q - q_true|| / ||q_true||.
inline double relative_l2_error(const Eigen::VectorXd& q, std::span<const double> truth) {
    if (static_cast<std::size_t>(q.size()) != truth.size()) throw ConfigError("relative_l2_error: size mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        const double d = q(static_cast<Eigen::Index>(j)) - truth[j];
        num += d * d;
        den += truth[j] * truth[j];
    }
    return std::sqrt(num / den);
}

}  // namespace biwave
