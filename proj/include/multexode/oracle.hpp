#pragma once

#include <optional>
#include <vector>

#include "multexode/gridfn.hpp"
#include "multexode/series.hpp"

namespace multexode::oracle {

/// n x n matrix of functions on one grid, row-major.
class MatrixFn {
public:
    MatrixFn(int n, std::vector<GridFn> entries);

    static MatrixFn identity(const Grid& grid, int n);
    static MatrixFn zero(const Grid& grid, int n);

    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] const Grid& grid() const { return entries_.front().grid(); }
    [[nodiscard]] const GridFn& at(int row, int col) const {
        return entries_[static_cast<std::size_t>(row * n_ + col)];
    }
    [[nodiscard]] const std::vector<GridFn>& entries() const { return entries_; }
    /// Largest |entry| over all entries and nodes.
    [[nodiscard]] double sup_norm() const;

private:
    int n_;
    std::vector<GridFn> entries_;
};

/// Companion matrix of y^(n) = a_1 y^(n-1) + ... + a_n y: ones on the
/// superdiagonal, bottom row (a_n, ..., a_1). `a` holds a_1..a_n.
[[nodiscard]] MatrixFn companion(const std::vector<GridFn>& a);

struct DysonResult {
    MatrixFn M;
    /// Terms above tol that were summed (0 when m vanishes).
    int terms_used = 0;
    /// Factorial bound on everything beyond the last summed term.
    double tail_bound = 0.0;
    /// Sup-norm of every computed term M_1, M_2, ...
    std::vector<double> term_norms;
    /// Sup-norm of the first term not summed.
    double next_term_norm = 0.0;
    /// max_x |int_0^x g| with g the entrywise max of |m|.
    double g_integral = 0.0;
    std::optional<std::vector<MatrixFn>> terms;
};

/// M = I + sum_j M_j with M_{j+1} = int_0^x m M_j, the product integral of m.
/// Stops after the first term with sup-norm <= tol.
[[nodiscard]] DysonResult dyson(const MatrixFn& m, const SeriesOptions& opts = {}, bool keep_terms = false);

/// sum_{j > J} (1/n) (n g_integral)^j / j!.
[[nodiscard]] double truncation_bound(double g_integral, int n, int J);

/// Classical RK4 for M' = m M, M(0) = I, marching out from 0 in both
/// directions. `steps` is the total step count over the grid; each cell is
/// split into ceil(steps / cells) substeps with m interpolated cubically.
[[nodiscard]] MatrixFn rk4(const MatrixFn& m, std::size_t steps);

}  // namespace multexode::oracle
